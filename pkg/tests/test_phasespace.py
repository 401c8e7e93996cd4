import numpy as np
import pytest
from hypothesis import given, seed
from hypothesis import strategies as st

from cauchylens import generators, hodge, sampling
from cauchylens.calculus import MeshMismatch, build_calculus
from cauchylens.phasespace import (
    Background,
    CHHCoords,
    GaugeParameter,
    GaussViolation,
    InitialData,
    InvalidCut,
    PhaseSpace,
    boundary_circles,
    charge_flux,
    chh_decompose,
    chh_reconstruct,
    flux_observable,
    gauge_generator,
    is_localised_in,
    radical_basis,
    sigma,
    sigma_cs,
    triangle_ring,
)


@seed(21)
@given(st.integers(0, 2**32 - 1))
def test_sigma_equals_split_form(calc, s):
    r = np.random.default_rng(s)
    x, y = sampling.random_homogeneous(calc, r), sampling.random_homogeneous(calc, r)
    M = calc.M[1]
    scale = abs(x.A @ (M @ y.E)) + abs(y.A @ (M @ x.E))
    lhs = sigma(calc, x, y)
    rhs = sigma_cs(calc, chh_decompose(calc, x), chh_decompose(calc, y))
    assert abs(lhs - rhs) <= 1e-10 * scale


@seed(22)
@given(st.integers(0, 2**32 - 1))
def test_label_round_trip(ps, s):
    v = np.random.default_rng(s).normal(size=ps.dim)
    assert np.allclose(ps.label(ps.data(v)), v, atol=1e-10)


def test_reconstruct_with_charge(calc, rng):
    rho = rng.normal(size=calc.n_vertices)
    rho[calc.boundary_vertices] = 0.0
    coords = chh_decompose(calc, sampling.random_homogeneous(calc, rng))
    data = chh_reconstruct(calc, coords, rho)
    back = chh_decompose(calc, data)
    for k in ("F", "H", "f", "h"):
        assert np.allclose(getattr(back, k), getattr(coords, k), atol=1e-9)


def test_charge_flux_balances_charge(calc, rng):
    rho = rng.normal(size=calc.n_vertices)
    assert np.isclose(calc.b0 @ charge_flux(calc, rho), calc.m0 @ rho)


def test_gauss_violation_is_rejected(calc, rng):
    bad = InitialData(np.zeros(calc.n_edges), rng.normal(size=calc.n_edges), np.zeros(calc.n_vertices))
    with pytest.raises(GaussViolation):
        chh_decompose(calc, bad)


def test_gauge_label_and_pairing_sign(ps, rng):
    c = ps.calculus
    lam = sampling.random_lg(ps, rng)
    g = ps.gauge_label(lam)
    assert np.allclose(ps.label(gauge_generator(c, lam)), g, atol=1e-10)
    v = rng.normal(size=ps.dim)
    h = ps.from_vector(v).h
    # sigma(v, G lam) = -<lam, h>_B
    assert np.isclose(ps.space.sigma(v, g), -(lam @ (c.B[0] @ h)), atol=1e-10)


def test_gauge_parameter_rejects_constants(calc):
    with pytest.raises(ValueError):
        GaugeParameter.checked(calc, np.ones(calc.n_boundary))


def test_radical_is_interior_gauge(calc, ps):
    rad = radical_basis(calc)
    assert len(rad) == hodge.free_vertices(calc).size
    for x in rad[:5]:
        assert np.abs(ps.label(x)).max() < 1e-10
        assert not x.E.any()


def test_flux_observable_measures_flux(calc, rng):
    data, Lam = flux_observable(calc, circles=[0])
    y = sampling.random_homogeneous(calc, rng)
    ring = calc.boundary_vertices[boundary_circles(calc)[0]]
    mask = np.zeros(calc.n_boundary)
    mask[boundary_circles(calc)[0]] = 1.0
    flux = mask @ (calc.B[0] @ (calc.nml[1] @ y.E))
    assert np.all(Lam[ring] == 1.0)
    assert np.isclose(sigma(calc, data, y), flux, atol=1e-10)


def test_flux_observable_invalid_cuts(calc):
    with pytest.raises(InvalidCut):
        flux_observable(calc, circles=[0, 1])
    with pytest.raises(InvalidCut):
        flux_observable(calc, circles=[7])
    with pytest.raises(InvalidCut):
        flux_observable(calc, region=[calc.boundary_vertices[0]])


def test_background_offset_is_label(ps, rng):
    x = sampling.random_homogeneous(ps.calculus, rng)
    assert np.array_equal(Background(x).offset(ps), ps.label(x))


def test_mesh_mismatch(calc):
    other = build_calculus(generators.disk(n_rings=2))
    with pytest.raises(MeshMismatch):
        sigma(calc, InitialData.homogeneous(calc), InitialData.homogeneous(other))


def test_json_round_trips(calc, rng):
    x = sampling.random_homogeneous(calc, rng)
    y = InitialData.from_json(x.to_json(), calc)
    assert np.array_equal(x.E, y.E)
    coords = chh_decompose(calc, x)
    back = CHHCoords.from_json(coords.to_json())
    assert np.array_equal(back.h, coords.h)


def test_interior_data_is_localised(calc, rng):
    x = sampling.random_interior_data(calc, rng)
    assert is_localised_in(x, triangle_ring(calc, np.flatnonzero(x.A)))
    # no trace on the boundary
    coords = chh_decompose(calc, x)
    assert np.abs(coords.f).max() < 1e-9 and np.abs(coords.h).max() < 1e-9


def test_phasespace_dimensions(ps):
    c = ps.calculus
    assert ps.n_surface == c.n_boundary - 1
    assert ps.dim == 2 * (hodge.tangential_dimension(c) + c.n_boundary - 1)
    assert isinstance(ps, PhaseSpace)
