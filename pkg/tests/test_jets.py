import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from whitney.errors import GuardError, ValidationError
from whitney.jets import (Jet, diff_jet, eval_jet, factorial_of, index_of,
                          jet_from_coeff_map, multi_indices, num_coeffs,
                          recenter_jet, sum_reciprocal_factorials)


def test_enumeration_count_and_distinct():
    for n in (1, 2, 3, 5):
        for m in (0, 1, 3):
            idx = multi_indices(n, m)
            assert len(idx) == math.comb(n + m, m)
            assert len(set(idx)) == len(idx)
            assert all(sum(a) <= m for a in idx)


def test_graded_lex_order():
    idx = multi_indices(2, 2)
    assert idx == ((0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0))


def test_eval_constant_jet():
    jet = jet_from_coeff_map([0.3, -0.7], 2, {(0, 0): 1.0})
    assert eval_jet(jet, [5.0, 5.0]) == 1.0


def test_eval_linear_1d():
    jet = Jet((0.0,), 1, (1.0, 2.0))
    assert eval_jet(jet, [0.5]) == 2.0


def test_eval_reproduces_quadratic():
    # F(x) = x1*x2 about (1,1); the degree-2 jet is exact, check at (2,3)
    # coeffs: value 1, d1 = x2 = 1, d2 = x1 = 1, d11 = 0, d12 = 1, d22 = 0
    jet = jet_from_coeff_map([1.0, 1.0], 2,
                             {(0, 0): 1.0, (1, 0): 1.0, (0, 1): 1.0, (1, 1): 1.0})
    assert eval_jet(jet, [2.0, 3.0]) == pytest.approx(6.0, abs=1e-14)
    # brute-force oracle on extra points
    for x in np.random.default_rng(0).uniform(-2, 2, size=(20, 2)):
        assert eval_jet(jet, x) == pytest.approx(x[0] * x[1], abs=1e-12)


def test_eval_dim_mismatch():
    jet = Jet((0.0,), 1, (1.0, 2.0))
    with pytest.raises(ValidationError):
        eval_jet(jet, [1.0, 2.0])


def test_diff_identity():
    jet = Jet((0.5, 0.5), 2, tuple(range(6)))
    assert diff_jet(jet, (0, 0)).coeffs == jet.coeffs


def test_diff_second_derivative_of_square():
    # P(x) = x^2 about 0: coeffs (0, 0, 1)
    jet = Jet((0.0,), 2, (0.0, 0.0, 1.0))
    dd = diff_jet(jet, (2,))
    assert dd.m == 0 and dd.coeffs == (2.0,)


def test_diff_mixed_symbolic():
    # P(x) = x1^2 x2 truncated at m=3; d^(1,1) P = 2 x1
    jet = jet_from_coeff_map([0.0, 0.0], 3, {(2, 1): 1.0})
    d = diff_jet(jet, (1, 1))
    expect = jet_from_coeff_map([0.0, 0.0], 1, {(1, 0): 2.0})
    assert d.coeffs == expect.coeffs


def test_diff_order_exceeds_degree():
    jet = Jet((0.0,), 1, (1.0, 1.0))
    with pytest.raises(ValidationError):
        diff_jet(jet, (2,))


def test_recenter_same_base_identity():
    jet = Jet((0.25,), 2, (1.0, 2.0, 3.0))
    assert recenter_jet(jet, (0.25,)).coeffs == jet.coeffs


def test_recenter_linear():
    # 1 + 2(x-0) recentered to 3 -> 7 + 2(x-3)
    jet = Jet((0.0,), 1, (1.0, 2.0))
    assert recenter_jet(jet, (3.0,)).coeffs == (7.0, 2.0)


def test_recenter_eval_oracle():
    rng = np.random.default_rng(7)
    jet = Jet(tuple(rng.random(3)), 2, tuple(rng.standard_normal(num_coeffs(3, 2))))
    moved = recenter_jet(jet, rng.random(3))
    for x in rng.random((20, 3)):
        a, b = eval_jet(jet, x), eval_jet(moved, x)
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 4), st.data())
def test_leibniz_composition_property(n, m, data):
    idx = multi_indices(n, m)
    coeffs = tuple(float(c) for c in data.draw(
        st.lists(st.integers(-9, 9), min_size=len(idx), max_size=len(idx))))
    jet = Jet((0.0,) * n, m, coeffs)
    alpha = tuple(data.draw(st.integers(0, m)) for _ in range(n))
    if sum(alpha) > m:
        return
    rest = m - sum(alpha)
    beta = tuple(data.draw(st.integers(0, rest)) for _ in range(n))
    if sum(beta) > rest:
        return
    ab = tuple(a + b for a, b in zip(alpha, beta))
    assert diff_jet(diff_jet(jet, alpha), beta).coeffs == diff_jet(jet, ab).coeffs


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 4))
def test_graded_lex_roundtrip_property(n, m):
    for i, alpha in enumerate(multi_indices(n, m)):
        assert index_of(alpha, m) == i


def test_sum_reciprocal_factorials_paper_value():
    assert sum_reciprocal_factorials(3, 2) == Fraction(9, 2)


def test_sum_reciprocal_factorials_r0():
    for n in (1, 4, 8):
        assert sum_reciprocal_factorials(n, 0) == 1


def test_sum_reciprocal_factorials_enumerated():
    # n=2, r=3: 1/6 + 1/2 + 1/2 + 1/6 = 4/3
    assert sum_reciprocal_factorials(2, 3) == Fraction(4, 3)


def test_sum_reciprocal_factorials_identity_range():
    for n in range(1, 9):
        for r in range(0, 7):
            assert sum_reciprocal_factorials(n, r) == Fraction(n ** r, math.factorial(r))


def test_sum_reciprocal_factorials_guards():
    with pytest.raises(ValidationError):
        sum_reciprocal_factorials(0, 1)
    with pytest.raises(GuardError):
        sum_reciprocal_factorials(17, 1)


def test_jet_coeff_count_enforced():
    with pytest.raises(ValidationError):
        Jet((0.0, 0.0), 1, (1.0,))


def test_deriv_at_base_factorials():
    jet = jet_from_coeff_map([0.0], 3, {(3,): 0.5})
    assert jet.deriv_at_base((3,)) == 0.5 * factorial_of((3,))
