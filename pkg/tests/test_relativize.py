import numpy as np
import pytest
from hypothesis import given, seed
from hypothesis import strategies as st

from cauchylens import sampling
from cauchylens.relativize import NotInvariant
from cauchylens.weyl import SpaceMismatch, WeylElement, generator, unit


def _invariant_label(ext, r):
    x = r.normal(size=ext.bulk.dim)
    return ext.ehat(x) + ext.joint_gauge(r.normal(size=ext.n_surface))


def test_ehat_lands_in_invariant_labels(ext, rng):
    x = rng.normal(size=ext.bulk.dim)
    v = ext.ehat(x)
    assert np.array_equal(v[ext.s_tau], -x[ext.bulk.slice("h")])
    assert not v[ext.s_phi].any()
    assert ext.invariant_generators()(v)


def test_joint_gauge_pairing_sign(ext, rng):
    v = rng.normal(size=ext.total.dim)
    lam = rng.normal(size=ext.n_surface)
    expected = -lam @ (v[ext.s_h] + v[ext.s_tau])
    assert np.isclose(ext.total.sigma(v, ext.joint_gauge(lam)), expected)


def test_gauge_fix(ext, rng):
    v = _invariant_label(ext, rng)
    fixed = ext.gauge_fix(v)
    assert not fixed[ext.s_phi].any()
    assert np.allclose(ext.gauge_fix(fixed), fixed)
    assert np.allclose(fixed, ext.ehat(ext.bulk_part(fixed)))
    bad = ext.total.zero()
    bad[ext.s_tau] = 1.0
    with pytest.raises(NotInvariant):
        ext.gauge_fix(bad)


@seed(51)
@given(st.integers(0, 2**32 - 1))
def test_gamma_inverts_relativisation(ext, s):
    a = sampling.random_element(ext.bulk, np.random.default_rng(s))
    assert ext.gamma(ext.relativise(a)).allclose(a)


@seed(52)
@given(st.integers(0, 2**32 - 1))
def test_gamma_is_multiplicative_on_invariants(ext, s):
    r = np.random.default_rng(s)
    a = WeylElement.from_terms(ext.total, [_invariant_label(ext, r) for _ in range(2)], r.normal(size=2) + 0j)
    b = WeylElement.from_terms(ext.total, [_invariant_label(ext, r) for _ in range(2)], r.normal(size=2) + 0j)
    assert ext.is_invariant(a * b)
    assert ext.gamma(a * b).allclose(ext.gamma(a) * ext.gamma(b), coeff_tol=1e-9)
    assert ext.gamma(a.star()).allclose(ext.gamma(a).star())


def test_gamma_sends_large_gauge_unitary_to_one(ext, rng):
    lam = rng.normal(size=ext.n_surface)
    assert ext.gamma(ext.u_lg(lam)).allclose(unit(ext.bulk))


def test_relativised_elements_are_gauge_invariant(ext, rng):
    a = ext.relativise(sampling.random_element(ext.bulk, rng))
    assert ext.joint_large_gauge(a, rng.normal(size=ext.n_surface)).allclose(a)
    assert ext.is_invariant(a)


def test_gamma_rejects_noninvariant(ext):
    bad = ext.total.zero()
    bad[ext.s_tau] = 1.0
    with pytest.raises(NotInvariant):
        ext.gamma(generator(ext.total, bad))
    with pytest.raises(SpaceMismatch):
        ext.gamma(unit(ext.bulk))


def test_factorisation(ext, rng):
    x = rng.normal(size=ext.bulk.dim)
    phi = rng.normal(size=ext.n_surface)
    surf = ext.total.zero()
    surf[ext.s_phi] = phi
    lhs = ext.relativise(generator(ext.bulk, x)) * generator(ext.total, surf)
    target = ext.ehat(x)
    target[ext.s_phi] = phi
    rhs = np.exp(-0.5j * phi @ x[ext.bulk.slice("h")]) * generator(ext.total, target)
    assert lhs.allclose(rhs, coeff_tol=1e-14)


def test_gamma_phi_phase(ext, rng):
    v = _invariant_label(ext, rng)
    Phi = rng.normal(size=ext.n_surface)
    a = generator(ext.total, v)
    expected = np.exp(1j * v[ext.s_phi] @ Phi) * ext.gamma(a)
    assert ext.gamma_phi(Phi, a).allclose(expected)
    assert ext.gamma_phi(np.zeros(ext.n_surface), a).allclose(ext.gamma(a))


def test_boundary_spectrum_oracle(ext):
    # annulus circles of radius 1 and 2, 24 vertices each: on one circle of
    # side l, K in a B0-orthonormal basis has eigenvalues (2/l^2)(1 - cos(2 pi k/N))
    w, _ = ext.boundary_spectrum()
    n = 24
    k = np.arange(1, n)
    expected = []
    for radius in (1.0, 2.0):
        side = 2 * radius * np.sin(np.pi / n)
        expected.append(2.0 / side**2 * (1 - np.cos(2 * np.pi * k / n)))
    expected = np.sort(np.concatenate([[0.0], *expected]))
    assert np.allclose(w, expected, atol=1e-9)


def test_truncation_limits(ext, rng):
    w, _ = ext.boundary_spectrum()
    assert np.array_equal(ext.projector(w[-1]), np.eye(ext.n_surface))
    P = ext.projector(float(w[5]))
    assert np.allclose(P @ P, P, atol=1e-12)
    a = sampling.random_element(ext.bulk, rng)
    assert ext.truncated_relativise(a, float("inf")).allclose(ext.relativise(a))
    errs = [e for _, e in ext.dressing_errors(rng.normal(size=ext.bulk.dim))]
    assert all(x >= y - 1e-12 for x, y in zip(errs, errs[1:]))
    assert errs[-1] == 0.0
    with pytest.raises(ValueError):
        ext.projector(-1.0)
