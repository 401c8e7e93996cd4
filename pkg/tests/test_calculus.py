import numpy as np
import pytest
from hypothesis import given, seed
from hypothesis import strategies as st

from cauchylens import generators
from cauchylens.calculus import (
    Cochain,
    DegreeMismatch,
    UnsupportedDegree,
    build_calculus,
    codifferential,
    edge_integrals,
    export_matrix_market,
    green_residual,
    incidence,
    inner_product,
    normal_trace,
    whitney_mass,
)
from cauchylens.simplicial import from_simplices

# Whitney 1-form Gram matrix of the reference triangle (0,0), (1,0), (0,1) with
# edges (0,1), (0,2), (1,2); frozen from a 360k-cell midpoint quadrature of
# lam_i grad lam_j - lam_j grad lam_i, which converges to these rationals.
REFERENCE_WHITNEY = np.array([[4.0, 2.0, 0.0], [2.0, 4.0, 0.0], [0.0, 0.0, 2.0]]) / 12.0


def test_whitney_mass_reference_triangle():
    m = from_simplices([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [[0, 1, 2]])
    assert np.allclose(whitney_mass(m).toarray(), REFERENCE_WHITNEY, atol=1e-15)


def test_incidence_is_a_complex(calc):
    assert abs(calc.d[1] @ calc.d[0]).max() == 0
    assert incidence(calc.mesh, 0).shape == (calc.n_edges, calc.n_vertices)


def test_mass_matrices_positive(calc):
    for M in calc.M:
        w = np.linalg.eigvalsh(M.toarray())
        assert w.min() > 0
    assert np.isclose(calc.m0.sum(), np.pi * 3.0, rtol=0.02)
    assert np.isclose(calc.b0.sum(), 2 * np.pi * 3.0, rtol=0.02)


def test_lumped_masses_match_geometry(calc):
    assert np.isclose(calc.m0.sum(), calc.mesh.volumes().sum())
    lengths = 1.0 / calc.B[1].diagonal()
    assert np.isclose(calc.b0.sum(), lengths.sum())


def test_codifferential_vanishes_on_boundary(calc, rng):
    beta = rng.normal(size=calc.n_edges)
    assert np.all((calc.dstar[1] @ beta)[calc.boundary_vertices] == 0)


def test_boundary_laplacian_kills_constants(calc):
    K = calc.d_boundary.T @ calc.B[1] @ calc.d_boundary
    assert np.abs(K @ np.ones(calc.n_boundary)).max() < 1e-12


@seed(3)
@given(st.integers(0, 2**32 - 1))
def test_green_identity_exact(calc, s):
    r = np.random.default_rng(s)
    res, scale = green_residual(calc, r.normal(size=calc.n_vertices), r.normal(size=calc.n_edges))
    assert res <= 1e-12 * scale


def test_green_identity_on_closed_surface():
    c = build_calculus(generators.sphere(1))
    r = np.random.default_rng(0)
    lam, beta = r.normal(size=c.n_vertices), r.normal(size=c.n_edges)
    res, scale = green_residual(c, lam, beta)
    assert res <= 1e-12 * scale
    assert c.n_boundary == 0


def _nml_error(n_radial):
    m = generators.annulus(n_radial=n_radial, n_angular=8 * n_radial)
    c = build_calculus(m)
    # grad(r^2) = 2x; nml is +2r2/... outward: -2 on r=1, +4 on r=2
    form = edge_integrals(m, lambda p: 2.0 * p)
    r = np.linalg.norm(m.vertices[c.boundary_vertices], axis=1)
    exact = np.where(r < 1.5, -2.0, 4.0)
    return np.abs(c.nml[1] @ form - exact).max()


def test_normal_trace_first_order():
    errs = [_nml_error(n) for n in (4, 8, 16)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert orders.min() >= 1.0


def test_codifferential_second_order_inside():
    errs = []
    for n in (4, 8, 16):
        m = generators.annulus(n_radial=n, n_angular=8 * n)
        c = build_calculus(m)
        form = edge_integrals(m, lambda p: 2.0 * p)
        # -dstar d(r^2) = laplacian(r^2) = 4
        div = -(c.dstar[1] @ form)[c.interior_vertices]
        errs.append(np.abs(div - 4.0).max())
    assert errs[2] < errs[1] < errs[0]


def test_cochain_wrappers(calc, rng):
    a = Cochain(1, rng.normal(size=calc.n_edges))
    assert inner_product(calc, a, a) > 0
    assert codifferential(calc, a).degree == 0
    assert normal_trace(calc, a).boundary
    with pytest.raises(DegreeMismatch):
        inner_product(calc, a, Cochain(0, np.zeros(calc.n_vertices)))
    with pytest.raises(UnsupportedDegree):
        codifferential(calc, Cochain(2, np.zeros(calc.mesh.count(2))))


def test_export(calc, tmp_path):
    paths = export_matrix_market(calc, tmp_path)
    assert paths and all(p.exists() for p in paths)


def test_build_is_deterministic(small_annulus):
    a, b = build_calculus(small_annulus), build_calculus(small_annulus)
    assert (a.M[1] != b.M[1]).nnz == 0
    assert (a.nml[1] != b.nml[1]).nnz == 0
