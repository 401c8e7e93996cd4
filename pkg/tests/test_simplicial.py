import numpy as np
import pytest
from hypothesis import given, seed
from hypothesis import strategies as st

from cauchylens import generators
from cauchylens.simplicial import (
    DegenerateSimplex,
    ParseError,
    ValidationError,
    boundary_mesh,
    check_volumes,
    connected_components,
    edge_lengths,
    from_simplices,
    load_mesh,
    parse_json,
    parse_off,
    to_json,
    to_off,
)

SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
SQUARE_TRIS = np.array([[0, 1, 2], [0, 2, 3]])


def test_square_counts_and_boundary():
    m = from_simplices(SQUARE, SQUARE_TRIS)
    assert (m.n_vertices, m.count(1), m.count(2)) == (4, 5, 2)
    assert m.euler_characteristic == 1
    assert not m.is_closed
    assert m.boundary_faces.size == 4
    assert np.all(m.orientation == 1)


def test_boundary_orientation_runs_counterclockwise():
    m = from_simplices(SQUARE, SQUARE_TRIS)
    edges = m.simplices[1][m.boundary_faces]
    heads = np.where(m.boundary_orientation > 0, edges[:, 1], edges[:, 0])
    tails = np.where(m.boundary_orientation > 0, edges[:, 0], edges[:, 1])
    succ = dict(zip(tails.tolist(), heads.tolist()))
    assert succ == {0: 1, 1: 2, 2: 3, 3: 0}


@pytest.mark.parametrize(
    "tris, message",
    [
        ([[0, 1, 7]], "missing vertex"),
        ([[0, 1, 1], [0, 2, 3]], "repeated vertex"),
        ([[0, 1, 2]], "dangling"),
        ([[0, 1, 2], [0, 2, 1], [0, 2, 3]], "duplicate"),
        ([[0, 1, 2], [0, 3, 2]], "inconsistent orientation"),
    ],
)
def test_validation_errors(tris, message):
    with pytest.raises(ValidationError, match=message):
        from_simplices(SQUARE, tris)


def test_non_manifold_edge_rejected():
    verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1.0]])
    with pytest.raises(ValidationError, match="non-manifold"):
        from_simplices(verts, [[0, 1, 2], [1, 0, 3], [0, 1, 4]])


def test_pinched_vertex_rejected():
    verts = np.array([[0, 0], [1, 0], [0, 1], [-1, 0], [0, -1.0]])
    with pytest.raises(ValidationError, match="pinched"):
        from_simplices(verts, [[0, 1, 2], [0, 3, 4]])


def test_degenerate_triangle_detected():
    verts = np.array([[0, 0], [1, 0], [2, 1e-14], [0, 1.0]])
    m = from_simplices(verts, [[0, 1, 2], [0, 2, 3]])
    with pytest.raises(DegenerateSimplex):
        check_volumes(m)


def test_metric_scales_lengths():
    m = from_simplices(SQUARE, SQUARE_TRIS, metric=np.array([4.0 * np.eye(2)] * 2))
    flat = from_simplices(SQUARE, SQUARE_TRIS)
    assert np.allclose(edge_lengths(m), 2.0 * edge_lengths(flat))
    assert np.allclose(m.volumes(), 4.0 * flat.volumes())


def test_boundary_mesh_is_closed_circle():
    m = generators.annulus(n_radial=2, n_angular=12)
    b = boundary_mesh(m)
    assert b.dim == 1 and b.is_closed
    assert connected_components(b).count == 2
    assert np.allclose(edge_lengths(b), edge_lengths(m)[m.boundary_faces])
    assert boundary_mesh(generators.sphere(1)) is None


def test_components_of_disjoint_union():
    u = generators.disjoint_union(generators.disk(n_rings=2), generators.annulus(n_radial=1, n_angular=8))
    comps = connected_components(u)
    assert comps.count == 2
    assert comps.vertex_labels[0] == 0


def test_off_round_trip(tmp_path):
    m = generators.disk(n_rings=2)
    p = tmp_path / "disk.off"
    p.write_text(to_off(m))
    back = load_mesh(p)
    assert np.array_equal(back.top, m.top)
    assert np.array_equal(back.orientation, m.orientation)


def test_json_round_trip():
    m = generators.annulus(n_radial=1, n_angular=6)
    back = parse_json(to_json(m))
    assert np.array_equal(back.simplices[1], m.simplices[1])


@pytest.mark.parametrize("text", ["", "OFF\n3 1 0\n0 0 0\n1 0 0\n", "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n4 0 1 2 2\n"])
def test_bad_off(text):
    with pytest.raises(ParseError):
        parse_off(text)


def test_bad_json():
    with pytest.raises(ParseError):
        parse_json("{")


@seed(11)
@given(n_radial=st.integers(1, 4), n_angular=st.integers(3, 20))
def test_annulus_topology(n_radial, n_angular):
    m = generators.annulus(n_radial=n_radial, n_angular=n_angular)
    assert m.euler_characteristic == 0
    assert m.boundary_faces.size == 2 * n_angular
    assert np.all(np.bincount(m.simplices[1][m.boundary_faces].ravel(), minlength=m.n_vertices)[m.boundary_vertices] == 2)


@seed(12)
@given(perm_seed=st.integers(0, 2**16))
def test_orientation_invariant_under_vertex_relabelling(perm_seed):
    m = generators.disk(n_rings=2)
    perm = np.random.default_rng(perm_seed).permutation(m.n_vertices)
    tris = np.argsort(perm)[np.asarray(_oriented(m))]
    relabelled = from_simplices(m.vertices[perm], tris)
    assert relabelled.euler_characteristic == 1
    assert relabelled.boundary_faces.size == m.boundary_faces.size
    assert np.isclose(relabelled.volumes().sum(), m.volumes().sum())


def _oriented(m):
    from cauchylens.simplicial import oriented_triangles

    return oriented_triangles(m)


def test_split_sphere_and_gluing():
    s = generators.split_sphere(6, 12)
    assert s.whole.is_closed and s.whole.euler_characteristic == 2
    for side in s.sides:
        assert side.euler_characteristic == 1
    glued, _, _ = generators.glue_meshes(s.sides[0], s.sides[1], s.vertex_pairs)
    assert glued.is_closed and glued.euler_characteristic == 2


def test_from_spec():
    m = generators.from_spec("annulus:n_radial=2,n_angular=10")
    assert m.n_vertices == 30
    with pytest.raises(ValidationError):
        generators.from_spec("torus")
