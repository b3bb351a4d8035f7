"""Optional matplotlib rendering for the CLI report paths (file output only)."""
from __future__ import annotations

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _cell_grid(lattice, n=241):
    s = np.linspace(0.0, 1.0, n)
    S, T = np.meshgrid(s, s, indexing="ij")
    return S, T, lattice.from_coords(S, T)


def save_wp_figure(wp, path: str, n: int = 241):
    """Heatmaps of log|wp| and arg wp over one fundamental cell."""
    S, T, z = _cell_grid(wp.lattice, n)
    v = np.asarray(wp.wp(z.ravel())).reshape(z.shape)
    mag = np.log10(np.clip(np.abs(v), 1e-12, 1e12))
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    im0 = axes[0].pcolormesh(S, T, mag, shading="auto", cmap="viridis")
    axes[0].set_title("log10 |wp|")
    fig.colorbar(im0, ax=axes[0])
    im1 = axes[1].pcolormesh(S, T, np.angle(v), shading="auto", cmap="twilight")
    axes[1].set_title("arg wp")
    fig.colorbar(im1, ax=axes[1])
    for ax in axes:
        ax.set_xlabel("s (units of 2 w1)")
        ax.set_ylabel("t (units of 2 w2)")
        ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_gamma_figure(g, path: str, n: int = 241):
    S, T, z = _cell_grid(g.lattice, n)
    v = np.asarray(g.gamma(z.ravel())).reshape(z.shape)
    mag = np.log10(np.clip(np.abs(v), 1e-12, 1e12))
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    im0 = axes[0].pcolormesh(S, T, mag, shading="auto", cmap="viridis")
    axes[0].set_title("log10 |gamma|")
    fig.colorbar(im0, ax=axes[0])
    im1 = axes[1].pcolormesh(S, T, np.angle(v), shading="auto", cmap="twilight")
    axes[1].set_title("arg gamma")
    fig.colorbar(im1, ax=axes[1])
    for ax in axes:
        ax.set_xlabel("s")
        ax.set_ylabel("t")
        ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_mesh_figure(mesh, path: str, max_faces: int = 30000):
    """3-D preview of an exported mesh (downsampled for large meshes)."""
    from mpl_toolkits.mplot3d.art3d import Poly3DCollection

    faces = mesh.faces
    if len(faces) > max_faces:
        step = int(np.ceil(len(faces) / max_faces))
        faces = faces[::step]
    tris = mesh.vertices[faces]
    fig = plt.figure(figsize=(7, 6))
    ax = fig.add_subplot(projection="3d")
    col = Poly3DCollection(tris, linewidths=0.05, edgecolors="k", alpha=0.85)
    col.set_facecolor((0.55, 0.7, 0.9))
    ax.add_collection3d(col)
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    ctr = (lo + hi) / 2
    r = float(np.max(hi - lo)) / 2
    ax.set_xlim(ctr[0] - r, ctr[0] + r)
    ax.set_ylim(ctr[1] - r, ctr[1] + r)
    ax.set_zlim(ctr[2] - r, ctr[2] + r)
    ax.set_box_aspect((1, 1, 1))
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_loop_figure(path_spec, lattice, path: str):
    """Flat-chart picture of an integration loop inside the fundamental cell."""
    pts = path_spec.sample(n_per_seg=80, endpoints=True)
    fig, ax = plt.subplots(figsize=(5, 5))
    corners = [0, 2 * lattice.w1, 2 * lattice.w1 + 2 * lattice.w2, 2 * lattice.w2, 0]
    ax.plot([c.real for c in corners], [c.imag for c in corners], "k--", lw=0.8)
    ax.plot(pts.real, pts.imag, "b-", lw=1.4)
    ax.plot(pts.real[:1], pts.imag[:1], "go")
    ax.set_aspect("equal")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
