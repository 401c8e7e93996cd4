import numpy as np
import pytest
from hypothesis import given, seed
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cauchylens import sampling
from cauchylens.weyl import (
    DimensionMismatch,
    NotSymplectic,
    SpaceMismatch,
    SymplecticMap,
    SymplecticSpace,
    WeylElement,
    background_shift,
    fixed_point_generators,
    generator,
    label_key,
    large_gauge,
    max_difference,
    multiply,
    tensor,
    two_norm,
    unit,
    weyl_map,
)

SPACE = SymplecticSpace.darboux([("q", "p", 2)], name="toy")
floats = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
labels = arrays(np.float64, 4, elements=floats)


@seed(31)
@given(labels, labels)
def test_ccr(v, w):
    lhs = generator(SPACE, v) * generator(SPACE, w)
    rhs = np.exp(-0.5j * SPACE.sigma(v, w)) * generator(SPACE, v + w)
    assert lhs.allclose(rhs)


@seed(32)
@given(st.integers(0, 2**32 - 1))
def test_associative_and_star_antihomomorphism(s):
    r = np.random.default_rng(s)
    a, b, c = (sampling.random_element(SPACE, r) for _ in range(3))
    assert ((a * b) * c).allclose(a * (b * c))
    assert (a * b).star().allclose(b.star() * a.star())
    assert a.star().star().allclose(a)


def test_unit_and_zero():
    a = sampling.random_element(SPACE, np.random.default_rng(1))
    assert (unit(SPACE) * a).allclose(a)
    assert (a - a).is_zero()
    assert (a + 0).allclose(a)


def test_hand_computed_product():
    # W(e_q) W(e_p) = exp(-i/2) W(e_q + e_p) for sigma(e_q, e_p) = 1
    q, p = np.eye(4)[0], np.eye(4)[2]
    prod = generator(SPACE, q) * generator(SPACE, p)
    assert np.isclose(prod.coefficient(q + p), np.exp(-0.5j))


def test_background_shift_is_inner():
    r = np.random.default_rng(2)
    a = sampling.random_element(SPACE, r)
    u = r.normal(size=4)
    W = generator(SPACE, u)
    assert background_shift(a, u).allclose(W * a * W.star())


def test_background_generator_sign():
    v, a = np.array([1.0, 0, 0, 0]), np.array([0, 0, 0.3, 0])
    # backgrounds A and A - a differ by exp(i sigma(v, a))
    w_a = generator(SPACE, v, background=np.zeros(4))
    w_shift = generator(SPACE, v, background=-a)
    assert np.isclose(w_shift.coefficient(v), np.exp(1j * SPACE.sigma(v, a)) * w_a.coefficient(v))


def test_large_gauge_is_automorphism():
    r = np.random.default_rng(3)
    a, b = sampling.random_element(SPACE, r), sampling.random_element(SPACE, r)
    g = r.normal(size=4)
    assert large_gauge(a * b, g).allclose(large_gauge(a, g) * large_gauge(b, g))


def test_label_key_tolerates_rounding():
    v = np.array([1.0, 2.0, 3.0, 0.1])
    assert label_key(v) == label_key(v * (1 + 1e-15))
    assert label_key(v) != label_key(v + 1e-6)
    merged = WeylElement.from_terms(SPACE, [v, v * (1 + 1e-15)], [1.0, 1.0])
    assert len(merged) == 1


def test_symplectic_map_validation():
    swap = np.zeros((4, 4))
    swap[0, 1] = swap[1, 0] = swap[2, 3] = swap[3, 2] = 1.0
    iota = SymplecticMap.build(swap, SPACE, SPACE)
    a = sampling.random_element(SPACE, np.random.default_rng(4))
    b = sampling.random_element(SPACE, np.random.default_rng(5))
    assert weyl_map(iota, a * b).allclose(weyl_map(iota, a) * weyl_map(iota, b))
    with pytest.raises(NotSymplectic):
        SymplecticMap.build(2 * np.eye(4), SPACE, SPACE)
    with pytest.raises(DimensionMismatch):
        SymplecticMap.build(np.eye(3), SPACE, SPACE)


def test_tensor_product_commutes_across_factors():
    big = SPACE.direct_sum(SPACE)
    r = np.random.default_rng(6)
    a, b = sampling.random_element(SPACE, r), sampling.random_element(SPACE, r)
    left = tensor(a, unit(SPACE), big)
    right = tensor(unit(SPACE), b, big)
    assert (left * right).allclose(right * left)
    assert (left * right).allclose(tensor(a, b, big))


def test_space_mismatch():
    other = SymplecticSpace.darboux([("q", "p", 1)])
    with pytest.raises(SpaceMismatch):
        multiply(unit(SPACE), unit(other))
    with pytest.raises(DimensionMismatch):
        generator(SPACE, np.zeros(3))


def test_fixed_points_and_json():
    pred = fixed_point_generators(SPACE, [[1.0, 0, 0, 0]])
    assert pred(np.array([0, 1.0, 2.0, 3.0])) and not pred(np.eye(4)[0])
    assert pred.basis.shape == (4, 3)
    a = sampling.random_element(SPACE, np.random.default_rng(7))
    assert max_difference(WeylElement.from_json(SPACE, a.to_json()), a) == 0.0
    assert np.isclose(two_norm(a), np.linalg.norm(a.coeffs))
