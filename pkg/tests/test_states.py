import numpy as np
import pytest
from hypothesis import given, seed
from hypothesis import strategies as st

from cauchylens import sampling
from cauchylens.states import (
    DominationError,
    QuasiFreeState,
    domination_margin,
    evaluate,
    gram_check,
    gram_matrix,
    l2_state,
    load_mu,
    save_mu,
)
from cauchylens.weyl import SpaceMismatch, SymplecticSpace, generator, unit

SPACE = SymplecticSpace.darboux([("q", "p", 3)])


@pytest.mark.parametrize("a", [0.25, 0.5, 1.0, 4.0])
def test_margin_of_scaled_identity(a):
    # for a Darboux form, mu = a I gives |L^-1 (sigma/2) L^-T| = 1 / (2a)
    assert np.isclose(domination_margin(SPACE, a * np.eye(6)), 1.0 / (2 * a))


def test_l2_state_saturates_bound(ps):
    w = l2_state(ps)
    assert abs(w.margin - 1.0) < 1e-12


def test_undersized_covariance_rejected():
    with pytest.raises(DominationError):
        QuasiFreeState(SPACE, 0.2 * np.eye(6))
    with pytest.raises(DominationError):
        QuasiFreeState(SPACE, -np.eye(6))
    with pytest.raises(SpaceMismatch):
        QuasiFreeState(SPACE, np.eye(4))


def test_gram_matches_weyl_products():
    w = l2_state(SPACE)
    V = np.random.default_rng(0).normal(size=(4, 6))
    G = gram_matrix(w, V)
    for j in range(4):
        for k in range(4):
            prod = generator(SPACE, V[j]).star() * generator(SPACE, V[k])
            assert np.isclose(G[j, k], evaluate(w, prod))


@seed(41)
@given(st.integers(0, 2**32 - 1))
def test_positivity_on_random_elements(s):
    r = np.random.default_rng(s)
    w = QuasiFreeState(SPACE, 0.5 * np.eye(6) + 0.1 * np.diag(r.random(6)))
    a = sampling.random_element(SPACE, r, n_terms=4)
    val = w(a.star() * a)
    assert val.real >= -1e-12 and abs(val.imag) < 1e-12
    assert gram_check(w, r.normal(size=(8, 6))) >= -1e-12


def test_normalised_and_one_point():
    w = l2_state(SPACE)
    assert w(unit(SPACE)) == 1.0
    u = np.arange(6.0)
    shifted = w.around(u)
    v = np.eye(6)[1]
    expected = np.exp(1j * SPACE.sigma(v, u) - 0.25)
    assert np.isclose(shifted.characteristic(v)[0], expected)


def test_restrict_marginal():
    w = l2_state(SPACE)
    sub = SymplecticSpace.darboux([("q", "p", 3)])
    m = w.restrict(["q", "p"], sub)
    assert np.array_equal(m.mu, w.mu)


def test_mu_round_trip(tmp_path):
    w = QuasiFreeState(SPACE, np.diag([1.0, 2, 3, 4, 5, 6]))
    path = tmp_path / "mu.mtx"
    save_mu(w, path)
    assert np.array_equal(load_mu(path), w.mu)
