import struct

import numpy as np
import pytest

from elliptica.intersect import Intersection, max_threads, self_intersections
from elliptica.mesh import SurfaceMesh, concatenate, weld, write_obj, write_ply


def square_patch(offset=0.0):
    v = np.array([[0, 0, offset], [1, 0, offset], [1, 1, offset], [0, 1, offset]], float)
    f = np.array([[0, 1, 2], [0, 2, 3]])
    return SurfaceMesh(v, f, np.zeros(4, complex))


def test_face_index_validation():
    with pytest.raises(ValueError):
        SurfaceMesh(np.zeros((2, 3)), np.array([[0, 1, 2]]), np.zeros(2, complex))


def test_face_areas_and_degenerate_drop():
    m = square_patch()
    assert np.allclose(m.face_areas(), [0.5, 0.5])
    v = np.vstack([m.vertices, m.vertices[0]])
    f = np.vstack([m.faces, [[0, 1, 4]]])   # zero-area sliver
    m2 = SurfaceMesh(v, f, np.zeros(5, complex)).drop_degenerate()
    assert m2.n_faces == 2


def test_transformed_flips_orientation_under_reflection():
    m = square_patch()
    refl = np.diag([1.0, 1.0, -1.0])
    m2 = m.transformed(refl, np.zeros(3))
    # winding reversed so the geometric orientation is preserved
    assert (m2.faces[0] == m.faces[0][::-1]).all()
    rot = np.diag([1.0, 1.0, 1.0])
    assert (m.transformed(rot, np.ones(3)).faces == m.faces).all()


def test_concatenate_and_weld():
    a = square_patch()
    b = square_patch().translated(np.array([1.0, 0, 0]))
    both = concatenate([a, b])
    assert both.n_vertices == 8
    welded, worst = weld(both, tol=1e-9)
    # the two patches share the x = 1 edge: two vertex pairs merge
    assert welded.n_vertices == 6
    assert worst <= 1e-9
    assert welded.n_faces == 4


def test_weld_respects_tolerance():
    a = square_patch()
    b = square_patch(offset=1e-3)
    both = concatenate([a, b])
    welded, _ = weld(both, tol=1e-6)
    assert welded.n_vertices == 8   # nothing merged


def test_obj_format(tmp_path):
    m = square_patch()
    path = tmp_path / "m.obj"
    write_obj(m, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "v 0 0 0"
    assert sum(1 for ln in lines if ln.startswith("v ")) == 4
    assert lines[-1].startswith("f ")
    idx = [int(tok) for tok in lines[-1].split()[1:]]
    assert min(idx) >= 1   # 1-based indexing


def test_ply_roundtrip_sizes(tmp_path):
    m = square_patch()
    path = tmp_path / "m.ply"
    write_ply(m, str(path))
    blob = path.read_bytes()
    header_end = blob.index(b"end_header\n") + len(b"end_header\n")
    header = blob[:header_end].decode()
    assert "binary_little_endian" in header
    body = blob[header_end:]
    assert len(body) == 4 * 3 * 8 + 2 * (1 + 12)
    x0 = struct.unpack("<d", body[:8])[0]
    assert x0 == 0.0


# ---------------------------------------------------------------------------
# intersection sweep
# ---------------------------------------------------------------------------

def crossing_pair():
    # two triangles crossing through each other's interior
    v = np.array([
        [0, 0, 0], [2, 0, 0], [0, 2, 0],        # in z = 0 plane
        [0.5, 0.5, -1], [1.5, 0.5, 1], [0.5, 1.5, 1],
    ], float)
    f = np.array([[0, 1, 2], [3, 4, 5]])
    return SurfaceMesh(v, f, np.zeros(6, complex))


def test_detects_crossing():
    hits = self_intersections(crossing_pair())
    assert len(hits) == 1
    assert isinstance(hits[0], Intersection)
    assert abs(hits[0].point[2]) < 1e-12   # crossing happens in the z=0 plane


def test_shared_vertex_pairs_skipped():
    v = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [-1, 0, 0.5]], float)
    f = np.array([[0, 1, 2], [0, 2, 3]])
    hits = self_intersections(SurfaceMesh(v, f, np.zeros(4, complex)))
    assert hits == []


def test_separated_triangles_no_hit():
    a = square_patch()
    b = square_patch(offset=0.5)
    hits = self_intersections(concatenate([a, b]))
    assert hits == []


def test_exclusion_radius():
    m = crossing_pair()
    m.end_markers = np.array([[0.8, 0.8, 0.0]])
    assert len(self_intersections(m, exclusion_radius=0.0)) == 1
    assert len(self_intersections(m, exclusion_radius=5.0)) == 0


def test_cross_split_restricts_pairs():
    m = concatenate([crossing_pair(), crossing_pair()])
    # pairs within each copy are ignored; only cross-copy pairs are tested
    hits = self_intersections(m, cross_split=2)
    faces = {(h.face_a < 2, h.face_b < 2) for h in hits}
    assert all(a != b for a, b in faces)


def test_max_threads_env(monkeypatch):
    monkeypatch.setenv("ELLIPTICA_THREADS", "3")
    assert max_threads() == 3
    monkeypatch.setenv("ELLIPTICA_THREADS", "junk")
    assert max_threads() == 1
