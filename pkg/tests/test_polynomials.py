import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy.integrate import quad

from heiswhitney.errors import DomainError, InconsistentDataError
from heiswhitney.polynomials import (NodeSet, Polynomial, divided_differences, integral_abs,
                                     integral_abs_many, markov_derivative_bound, max_abs,
                                     newton_interpolant, real_roots, taylor_from_jet,
                                     taylor_local)

coeff = st.floats(-10, 10, allow_nan=False)
coeffs = st.lists(coeff, min_size=1, max_size=7)


def _dd_recursive(x, y):
    """Textbook recursion on index ranges, no tables."""
    if len(x) == 1:
        return y[0]
    return (_dd_recursive(x[1:], y[1:]) - _dd_recursive(x[:-1], y[:-1])) / (x[-1] - x[0])


def _dd_explicit(x, y):
    return sum(y[j] / np.prod([x[j] - x[k] for k in range(len(x)) if k != j])
               for j in range(len(x)))


@st.composite
def spaced_nodes(draw, min_size=1, max_size=8):
    n = draw(st.integers(min_size, max_size))
    gaps = draw(st.lists(st.floats(0.05, 0.5), min_size=n, max_size=n))
    start = draw(st.floats(-2, 2))
    return start + np.cumsum(gaps)


def test_trimming_and_zero():
    assert Polynomial([1.0, 2.0, 0.0, 0.0]).degree == 1
    assert Polynomial([]).is_zero()
    assert Polynomial([0.0, 0.0]).is_zero()
    with pytest.raises(DomainError):
        Polynomial([1.0, np.inf])


@given(coeffs, coeffs, st.floats(-3, 3))
def test_arithmetic_matches_numpy(a, b, x):
    P, Q = Polynomial(a), Polynomial(b)
    ref = np.polynomial.Polynomial
    assert (P + Q)(x) == pytest.approx(ref(a)(x) + ref(b)(x), abs=1e-8)
    assert (P * Q)(x) == pytest.approx((ref(a) * ref(b))(x), rel=1e-9, abs=1e-8)
    assert (P - Q)(x) == pytest.approx(ref(a)(x) - ref(b)(x), abs=1e-8)
    assert P.deriv(2)(x) == pytest.approx(ref(a).deriv(2)(x), rel=1e-9, abs=1e-8)


@given(coeffs, st.floats(-2, 2), st.floats(-2, 2))
def test_shift_and_integrate(c, a, x):
    P = Polynomial(c)
    assert P.shift(a)(x) == pytest.approx(P(x + a), rel=1e-9, abs=1e-7)
    assert P.integrate(0.0, x) == pytest.approx(quad(P, 0.0, x)[0], rel=1e-9, abs=1e-9)


def test_compensated_horner_beats_plain_on_cancellation():
    # (x - 1)^7 expanded, evaluated near its root
    P = Polynomial([math.comb(7, k) * (-1) ** (7 - k) for k in range(8)])
    x = 1.0 + 1e-3
    assert abs(P(x) - 1e-21) <= 1e-22
    assert abs(P.eval_plain(x) - 1e-21) > abs(P(x) - 1e-21)


@given(spaced_nodes(), st.data())
def test_divided_differences_against_two_oracles(x, data):
    y = np.array(data.draw(st.lists(coeff, min_size=x.size, max_size=x.size)))
    dd = divided_differences(x, y)
    for k in range(x.size):
        ref = _dd_recursive(list(x[: k + 1]), list(y[: k + 1]))
        assert dd[k] == pytest.approx(ref, rel=1e-9, abs=1e-9)
        assert dd[k] == pytest.approx(_dd_explicit(x[: k + 1], y[: k + 1]), rel=1e-8, abs=1e-8)


@given(spaced_nodes(min_size=2), st.data())
def test_top_divided_difference_is_symmetric(x, data):
    y = np.array(data.draw(st.lists(coeff, min_size=x.size, max_size=x.size)))
    perm = np.array(data.draw(st.permutations(range(x.size))))
    top, top_p = divided_differences(x, y)[-1], divided_differences(x[perm], y[perm])[-1]
    assert top_p == pytest.approx(top, rel=1e-10, abs=1e-10 * (1 + np.abs(y).max()) /
                                  np.min(np.diff(x)) ** (x.size - 1))


@given(spaced_nodes(), st.data())
def test_newton_interpolant_interpolates_and_reproduces(x, data):
    y = np.array(data.draw(st.lists(coeff, min_size=x.size, max_size=x.size)))
    P = newton_interpolant(x, y)
    assert P.degree <= x.size - 1
    # monomial coefficients about 0 lose digits when nodes sit far from 0;
    # the rounding scale is the evaluation condition number sum |c_k| |x|^k
    cond = np.abs(P.coeffs) @ np.abs(x[None, :]) ** np.arange(P.coeffs.size)[:, None]
    np.testing.assert_allclose(P(x), y, atol=1e-7 * (1 + np.abs(y).max()) + 1e-14 * cond.max())
    Q = Polynomial(y[: x.size])
    R = newton_interpolant(x, Q(x))
    cond = np.abs(R.coeffs) @ np.abs(x[None, :] + 0.01) ** np.arange(R.coeffs.size)[:, None]
    np.testing.assert_allclose(R(x + 0.01), Q(x + 0.01), rtol=1e-7, atol=1e-6 + 1e-14 * cond.max())


def test_duplicate_nodes_rejected():
    with pytest.raises(InconsistentDataError):
        divided_differences([0.0, 0.0], [1.0, 2.0])
    with pytest.raises(DomainError):
        divided_differences([0.0, 1.0], [1.0])


def test_node_set_is_order_free():
    with pytest.raises(DomainError):
        NodeSet((0.2, 0.1))
    assert NodeSet.of([0.3, 0.1, 0.2]).array().tolist() == [0.1, 0.2, 0.3]
    assert NodeSet.of([0.1, 0.3]).diam == pytest.approx(0.2)


def test_taylor_from_jet():
    # jet of exp at a = 0.5
    a = 0.5
    P = taylor_from_jet([math.exp(a)] * 5, a)
    assert P(a + 0.1) == pytest.approx(math.exp(a + 0.1), rel=1e-6)
    assert taylor_local([1.0, 2.0, 6.0]).coeffs.tolist() == [1.0, 2.0, 3.0]


@given(st.lists(st.floats(-1.5, 1.5), min_size=1, max_size=5, unique=True))
def test_real_roots_recovers_planted_roots(roots):
    roots = sorted(roots)
    assume(len(roots) < 2 or np.min(np.diff(roots)) > 1e-3)
    P = Polynomial([1.0])
    for r in roots:
        P = P * Polynomial([-r, 1.0])
    found = real_roots(P, -2.0, 2.0)
    assert len(found) == len(roots)
    np.testing.assert_allclose(found, roots, atol=1e-9)


def test_real_roots_against_numpy_and_double_root():
    rng = np.random.default_rng(3)
    for _ in range(50):
        c = rng.normal(size=6)
        P = Polynomial(c)
        ref = np.roots(c[::-1])
        ref = sorted(r.real for r in ref if abs(r.imag) < 1e-9 and -1 < r.real < 1)
        np.testing.assert_allclose(real_roots(P, -1.0, 1.0), ref, atol=1e-7)
    assert real_roots(Polynomial([0.25, -1.0, 1.0]), 0.0, 1.0) == [0.5]
    assert real_roots(Polynomial([0.0]), 0.0, 1.0) == []


@given(coeffs, st.floats(-2, 0), st.floats(0.01, 2))
def test_integral_abs_against_quad(c, a, w):
    P = Polynomial(c)
    b = a + w
    pts = real_roots(P, a, b)
    ref = quad(lambda t: abs(P(t)), a, b, points=pts or None, epsabs=1e-13, epsrel=1e-12,
               limit=200)[0]
    assert integral_abs(P, a, b) == pytest.approx(ref, rel=1e-8, abs=1e-10)
    many = integral_abs_many(P, a, [a, a + w / 3, b])
    assert many[0] == 0.0
    assert many[1] == pytest.approx(integral_abs(P, a, a + w / 3), rel=1e-10, abs=1e-12)
    assert many[2] == pytest.approx(integral_abs(P, a, b), rel=1e-10, abs=1e-12)


def test_max_abs_and_markov():
    T2 = Polynomial([-1.0, 0.0, 2.0])
    assert max_abs(T2, -1.0, 1.0) == pytest.approx(1.0)
    # Markov: max |P'| <= 2 n^2 / (b - a) max |P|; equality for Chebyshev
    bound, sup = markov_derivative_bound(T2, -1.0, 1.0)
    assert (bound, sup) == (pytest.approx(4.0), pytest.approx(1.0))
    assert max_abs(T2.deriv(), -1.0, 1.0) <= bound + 1e-12
    rng = np.random.default_rng(5)
    for _ in range(30):
        P = Polynomial(rng.normal(size=5))
        b, _ = markov_derivative_bound(P, 0.0, 2.0)
        assert max_abs(P.deriv(), 0.0, 2.0) <= b * (1 + 1e-12)
