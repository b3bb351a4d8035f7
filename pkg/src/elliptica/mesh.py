"""Indexed triangle meshes with torus-coordinate provenance, plus OBJ/PLY export."""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass
class SurfaceMesh:
    """Triangle mesh in R^3.

    vertices    (N, 3) float
    faces       (M, 3) int, CCW
    provenance  (N,) complex: flat-chart coordinate each vertex came from
    vertex_tags name -> bool mask over vertices (symmetry edges, end rims)
    end_markers (K, 3) representative end locations used by exclusion logic
    """

    vertices: np.ndarray
    faces: np.ndarray
    provenance: np.ndarray
    vertex_tags: dict = field(default_factory=dict)
    end_markers: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.faces = np.asarray(self.faces, dtype=np.int64)
        self.provenance = np.asarray(self.provenance, dtype=complex)
        if self.faces.size and self.faces.max() >= len(self.vertices):
            raise ValueError("face indexes out of range")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def face_areas(self) -> np.ndarray:
        p = self.vertices[self.faces]
        return 0.5 * np.linalg.norm(
            np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1
        )

    def drop_degenerate(self, area_tol: float = 1e-14) -> "SurfaceMesh":
        keep = self.face_areas() > area_tol
        return SurfaceMesh(self.vertices, self.faces[keep], self.provenance,
                           dict(self.vertex_tags), self.end_markers)

    def transformed(self, rot: np.ndarray, shift: np.ndarray,
                    provenance: Optional[np.ndarray] = None) -> "SurfaceMesh":
        v = self.vertices @ np.asarray(rot).T + np.asarray(shift)
        faces = self.faces
        if np.linalg.det(rot) < 0:
            faces = faces[:, ::-1]  # keep orientation consistent
        prov = self.provenance if provenance is None else provenance
        markers = self.end_markers @ np.asarray(rot).T + np.asarray(shift) \
            if len(self.end_markers) else self.end_markers
        return SurfaceMesh(v, faces, prov, dict(self.vertex_tags), markers)

    def translated(self, shift: np.ndarray) -> "SurfaceMesh":
        return self.transformed(np.eye(3), shift)

    def extent(self) -> float:
        if not len(self.vertices):
            return 0.0
        return float(np.linalg.norm(self.vertices.max(0) - self.vertices.min(0)))


def concatenate(meshes: list[SurfaceMesh]) -> SurfaceMesh:
    vs, fs, ps, markers = [], [], [], []
    tags: dict[str, list] = {}
    offset = 0
    names = set()
    for m in meshes:
        names.update(m.vertex_tags)
    for m in meshes:
        vs.append(m.vertices)
        fs.append(m.faces + offset)
        ps.append(m.provenance)
        if len(m.end_markers):
            markers.append(m.end_markers)
        for name in names:
            tags.setdefault(name, []).append(
                m.vertex_tags.get(name, np.zeros(m.n_vertices, dtype=bool))
            )
        offset += m.n_vertices
    return SurfaceMesh(
        np.concatenate(vs), np.concatenate(fs), np.concatenate(ps),
        {k: np.concatenate(v) for k, v in tags.items()},
        np.concatenate(markers) if markers else np.zeros((0, 3)),
    )


def weld(mesh: SurfaceMesh, tol: float) -> tuple[SurfaceMesh, float]:
    """Merge vertices closer than tol; returns (mesh, worst merge distance).

    Vertices are grouped by rounding positions to a tol grid (with one
    re-check pass against neighbour cells so borderline pairs still merge).
    """
    v = mesh.vertices
    if not len(v):
        return mesh, 0.0
    keys = np.round(v / tol).astype(np.int64)
    groups: dict[tuple, int] = {}
    remap = np.empty(len(v), dtype=np.int64)
    rep: list[int] = []
    worst = 0.0
    for i, key in enumerate(map(tuple, keys)):
        hit = None
        for nb in _neighbor_keys(key):
            j = groups.get(nb)
            if j is not None and np.linalg.norm(v[i] - v[rep[j]]) <= tol:
                hit = j
                break
        if hit is None:
            groups[key] = len(rep)
            remap[i] = len(rep)
            rep.append(i)
        else:
            worst = max(worst, float(np.linalg.norm(v[i] - v[rep[hit]])))
            remap[i] = hit
    rep_idx = np.array(rep)
    faces = remap[mesh.faces]
    nondeg = (faces[:, 0] != faces[:, 1]) & (faces[:, 1] != faces[:, 2]) & (faces[:, 0] != faces[:, 2])
    tags = {}
    for name, mask in mesh.vertex_tags.items():
        out = np.zeros(len(rep_idx), dtype=bool)
        np.logical_or.at(out, remap, mask)
        tags[name] = out
    welded = SurfaceMesh(v[rep_idx], faces[nondeg], mesh.provenance[rep_idx],
                         tags, mesh.end_markers)
    return welded, worst


def _neighbor_keys(key):
    x, y, z = key
    yield (x, y, z)
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dz in (-1, 0, 1):
                if (dx, dy, dz) != (0, 0, 0):
                    yield (x + dx, y + dy, z + dz)


def write_obj(mesh: SurfaceMesh, path: str):
    with open(path, "w") as fh:
        for v in mesh.vertices:
            fh.write("v %.9g %.9g %.9g\n" % (v[0], v[1], v[2]))
        for f in mesh.faces:
            fh.write("f %d %d %d\n" % (f[0] + 1, f[1] + 1, f[2] + 1))


def write_ply(mesh: SurfaceMesh, path: str):
    """Binary little-endian PLY."""
    header = (
        "ply\n"
        "format binary_little_endian 1.0\n"
        f"element vertex {mesh.n_vertices}\n"
        "property double x\nproperty double y\nproperty double z\n"
        f"element face {mesh.n_faces}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(mesh.vertices, dtype="<f8").tobytes())
        for f in mesh.faces:
            fh.write(struct.pack("<B3i", 3, int(f[0]), int(f[1]), int(f[2])))
