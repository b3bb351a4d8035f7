"""Triangle-triangle intersection sweep with a uniform spatial hash.

Used by the embedding probe: pairs of non-adjacent triangles are gathered
by hashing bounding boxes into grid cells, then tested by crossing each
edge of one triangle against the other (vectorized Moeller-Trumbore with
strict interior margins, so weld-seam touching is not reported).
"""
from __future__ import annotations

import os
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .mesh import SurfaceMesh


def max_threads() -> int:
    """Parallelism cap honoured by the sweep (ELLIPTICA_THREADS)."""
    try:
        return max(1, int(os.environ.get("ELLIPTICA_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class Intersection:
    face_a: int
    face_b: int
    point: np.ndarray


def _edge_tri_hits(orig, vec, tri, eps=1e-10):
    """Segment orig + t*vec, t in [0,1], against triangles tri (n,3,3).

    Returns (mask, points); interior crossings only (barycentric margins).
    """
    e1 = tri[:, 1] - tri[:, 0]
    e2 = tri[:, 2] - tri[:, 0]
    p = np.cross(vec, e2)
    det = np.einsum("ij,ij->i", e1, p)
    scale = np.linalg.norm(vec, axis=1) * np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1)
    ok = np.abs(det) > eps * np.maximum(scale, 1e-300)
    inv = np.where(ok, 1.0 / np.where(det == 0, 1.0, det), 0.0)
    t0 = orig - tri[:, 0]
    u = np.einsum("ij,ij->i", t0, p) * inv
    q = np.cross(t0, e1)
    v = np.einsum("ij,ij->i", vec, q) * inv
    t = np.einsum("ij,ij->i", e2, q) * inv
    m = 1e-9
    ok &= (u > m) & (v > m) & (u + v < 1 - m) & (t > m) & (t < 1 - m)
    return ok, orig + vec * t[:, None]


def _tri_pairs_cross(va, vb):
    """Test triangle pairs va (n,3,3) against vb (n,3,3); edge-vs-triangle."""
    n = len(va)
    mask = np.zeros(n, dtype=bool)
    points = np.zeros((n, 3))
    for tri_from, tri_to in ((va, vb), (vb, va)):
        for k in range(3):
            orig = tri_from[:, k]
            vec = tri_from[:, (k + 1) % 3] - orig
            hit, pts = _edge_tri_hits(orig, vec, tri_to)
            new = hit & ~mask
            points[new] = pts[new]
            mask |= hit
    return mask, points


def _hash_faces(vertices, faces, cell):
    lo = vertices[faces].min(axis=1)
    hi = vertices[faces].max(axis=1)
    lo_id = np.floor(lo / cell).astype(np.int64)
    hi_id = np.floor(hi / cell).astype(np.int64)
    table = defaultdict(list)
    for i in range(len(faces)):
        x0, y0, z0 = lo_id[i]
        x1, y1, z1 = hi_id[i]
        for x in range(x0, x1 + 1):
            for y in range(y0, y1 + 1):
                for z in range(z0, z1 + 1):
                    table[(x, y, z)].append(i)
    return table


def _candidate_pairs(mesh: SurfaceMesh, cell: float) -> np.ndarray:
    table = _hash_faces(mesh.vertices, mesh.faces, cell)
    pairs = set()
    for ids in table.values():
        if len(ids) < 2:
            continue
        ids = sorted(ids)
        for a in range(len(ids)):
            for b in range(a + 1, len(ids)):
                pairs.add((ids[a], ids[b]))
    if not pairs:
        return np.zeros((0, 2), dtype=np.int64)
    return np.array(sorted(pairs), dtype=np.int64)


def self_intersections(
    mesh: SurfaceMesh,
    exclusion_radius: float = 0.0,
    cell: float | None = None,
    chunk: int = 200_000,
    cross_split: int | None = None,
) -> list[Intersection]:
    """All interior triangle-triangle crossings of a mesh.

    Pairs sharing a vertex index are skipped (mesh adjacency), as are pairs
    where either triangle sits within exclusion_radius of an end marker.
    With cross_split set, only pairs straddling that face index are tested
    (for overlap checks between two concatenated meshes).
    """
    if mesh.n_faces == 0:
        return []
    if cell is None:
        p = mesh.vertices[mesh.faces]
        sizes = np.linalg.norm(p.max(axis=1) - p.min(axis=1), axis=1)
        cell = float(np.median(sizes) * 2.0 + 1e-12)
    pairs = _candidate_pairs(mesh, cell)
    if not len(pairs):
        return []
    if cross_split is not None:
        straddle = (pairs[:, 0] < cross_split) != (pairs[:, 1] < cross_split)
        pairs = pairs[straddle]

    f = mesh.faces
    share = np.zeros(len(pairs), dtype=bool)
    for i in range(3):
        for j in range(3):
            share |= f[pairs[:, 0], i] == f[pairs[:, 1], j]
    pairs = pairs[~share]

    if exclusion_radius > 0 and len(mesh.end_markers):
        centers = mesh.vertices[mesh.faces].mean(axis=1)
        d = np.min(
            np.linalg.norm(centers[:, None, :] - mesh.end_markers[None, :, :], axis=2),
            axis=1,
        )
        near = d < exclusion_radius
        pairs = pairs[~(near[pairs[:, 0]] | near[pairs[:, 1]])]

    tri = mesh.vertices[mesh.faces]
    chunks = [pairs[k:k + chunk] for k in range(0, len(pairs), chunk)]

    def run(pk):
        mask, pts = _tri_pairs_cross(tri[pk[:, 0]], tri[pk[:, 1]])
        return [Intersection(int(pk[i, 0]), int(pk[i, 1]), pts[i])
                for i in np.nonzero(mask)[0]]

    workers = max_threads()
    out: list[Intersection] = []
    if workers > 1 and len(chunks) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(run, chunks):
                out.extend(part)
    else:
        for pk in chunks:
            out.extend(run(pk))
    return out
