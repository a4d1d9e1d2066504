import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from heiswhitney.errors import AdmissibilityError, DomainError, ValidationError
from heiswhitney.extension import (ExtensionConstants, Gap, extend_cinfty, extend_horizontal,
                                   horizontality_repair, vertical_redefine,
                                   whitney_extend_scalar)
from heiswhitney.heisenberg import HPoint, leibniz_vertical_jet
from heiswhitney.jets import HorizontalJetTriple, ScalarJet
from heiswhitney.modulus import ModulusOfContinuity
from heiswhitney.polynomials import Polynomial
from heiswhitney.suite import circle_lift, cubic_lift, tilted_circle, vertical_line

LIN = ModulusOfContinuity.linear()


def poly_jet(coeffs, K, m):
    P = np.polynomial.Polynomial(coeffs)
    return ScalarJet.from_derivatives(K, [P.deriv(k) for k in range(m + 1)])


def horizontal_triple(F, G, H0):
    """Jets whose vertical part is the Leibniz value over ``H0``."""
    H = leibniz_vertical_jet(F.data, G.data, np.asarray(H0, dtype=float))
    return HorizontalJetTriple(F, G, ScalarJet(F.K, F.m, H))


def chi_closed_form(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    out[s >= 1] = 1.0
    mid = (s > 0) & (s < 1)
    a = np.exp(-1.0 / s[mid])
    b = np.exp(-1.0 / (1.0 - s[mid]))
    out[mid] = a / (a + b)
    return out


# ------------------------------------------------------------ scalar blend

def test_scalar_quadratic_reproduced():
    K = [0.0, 0.3, 1.0]
    f = whitney_extend_scalar(poly_jet([1, -2, 3], K, 2))
    t = np.linspace(0, 1, 41)
    assert np.allclose(f(t), 1 - 2 * t + 3 * t ** 2, atol=1e-14)
    assert np.allclose(f.derivs(t, 2)[2], 6.0, atol=1e-10)


def test_scalar_constant():
    f = whitney_extend_scalar(ScalarJet([0, 0.5, 2], 1, [[4, 4, 4], [0, 0, 0]]))
    assert np.allclose(f(np.linspace(0, 2, 17)), 4.0)


def test_scalar_step_is_smoothstep():
    f = whitney_extend_scalar(ScalarJet([0, 1], 0, [[0, 1]]))
    t = np.linspace(0, 1, 23)
    assert np.allclose(f(t), chi_closed_form(t), atol=1e-15)


def test_scalar_outer_segments_are_taylor():
    F = poly_jet([0, 1, 0, 1], [0, 1], 2)
    f = whitney_extend_scalar(F, (-1.0, 2.0))
    assert f(-0.5) == pytest.approx(-0.5)
    # right end: 2 + 4 u + 3 u^2
    assert f(1.5) == pytest.approx(2 + 4 * 0.5 + 3 * 0.25)
    with pytest.raises(DomainError):
        f(2.5)
    with pytest.raises(DomainError):
        whitney_extend_scalar(F, (0.2, 1.0))


@settings(max_examples=20)
@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 3))
def test_scalar_matches_jets_from_both_sides(seed, m):
    rng = np.random.default_rng(seed)
    K = np.cumsum(rng.uniform(0.1, 0.5, 5))
    F = ScalarJet(K, m, rng.normal(size=(m + 1, 5)))
    f = whitney_extend_scalar(F)
    for side in ("left", "right"):
        assert np.allclose(f.derivs(K, m, side), F.data, atol=1e-12)


def test_scalar_smooth_across_sample_points():
    # one-sided difference quotients agree at an interior node
    F = ScalarJet([0, 0.4, 1], 2, [[0, 1, 0], [1, -1, 2], [0, 3, -1]])
    f = whitney_extend_scalar(F)
    s = 1e-5
    right = (f(0.4 + s) - f(0.4)) / s
    left = (f(0.4) - f(0.4 - s)) / s
    assert right == pytest.approx(-1.0, abs=1e-3)
    assert left == pytest.approx(-1.0, abs=1e-3)


# ------------------------------------------------------ vertical deficits

def test_deficits_vanish_for_exact_taylor_data():
    curve = cubic_lift()
    gamma = curve.uniform_jets(5, 3)
    f = whitney_extend_scalar(gamma.F)
    g = whitney_extend_scalar(gamma.G)
    deficits = vertical_redefine(f, g, gamma.H.data[0])
    assert set(deficits) == {0, 1, 2, 3}
    assert max(abs(v) for v in deficits.values()) < 1e-12


def test_deficits_without_g_are_height_differences():
    K = [0.0, 0.5, 1.0]
    F = poly_jet([0, 1, 1], K, 2)
    G = ScalarJet(K, 2, np.zeros((3, 3)))
    H0 = [0.0, 0.7, -0.1]
    d = vertical_redefine(whitney_extend_scalar(F), whitney_extend_scalar(G), H0)
    assert d[0] == pytest.approx(0.7)
    assert d[1] == pytest.approx(-0.8)


def test_deficit_against_scipy():
    K = [0.0, 0.6, 1.0]
    F = ScalarJet(K, 1, [[0, 1, 0], [1, 0, -1]])
    G = ScalarJet(K, 1, [[0, 0.5, 1], [2, 0, 1]])
    f, g = whitney_extend_scalar(F), whitney_extend_scalar(G)
    H0 = [0.0, 0.2, 0.3]
    d = vertical_redefine(f, g, H0, gaps=[1])

    def bracket(t):
        fd, gd = f.derivs(t, 1), g.derivs(t, 1)
        return float(fd[1, 0] * gd[0, 0] - fd[0, 0] * gd[1, 0])

    ref = H0[2] - H0[1] - 2 * quad(bracket, 0.6, 1.0, epsabs=1e-14, limit=200)[0]
    assert list(d) == [1]
    assert d[1] == pytest.approx(ref, abs=1e-11)


# ---------------------------------------------------------------- repair

def _quad_residual(pair, f, g, A):
    bumps = pair.phi + pair.psi

    def integrand(t):
        ph = sum((b.derivs(t, 1)[:, 0] for b in pair.phi), np.zeros(2))
        ps = sum((b.derivs(t, 1)[:, 0] for b in pair.psi), np.zeros(2))
        return ps[0] * f.deriv()(t) - ph[0] * g.deriv()(t) + ps[0] * ph[1]

    lo = min(b.lo for b in bumps)
    hi = max(b.hi for b in bumps)
    return abs(4 * quad(integrand, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=400)[0] - A)


def test_repair_zero_deficit_is_empty():
    pair = horizontality_repair(Gap(0, 1), Polynomial([0, 1]), Polynomial([0]), 0.0, 1)
    assert pair.phi == () and pair.psi == ()
    assert pair.residual == 0.0


def test_repair_f_big():
    f, g = Polynomial([0, 1]), Polynomial([0])
    pair = horizontality_repair(Gap(0, 1), f, g, 0.01, 1)
    assert pair.case == "FBig"
    assert len(pair.psi) == 1 and pair.phi == ()
    assert pair.residual < 1e-11
    assert _quad_residual(pair, f, g, 0.01) < 1e-11


def test_repair_g_big():
    f, g = Polynomial([0]), Polynomial([1, -2])
    pair = horizontality_repair(Gap(0, 1), f, g, -0.03, 2)
    assert pair.case == "GBig"
    assert len(pair.phi) == 1 and pair.psi == ()
    assert _quad_residual(pair, f, g, -0.03) < 1e-11


@pytest.mark.parametrize("A", [1e-3, -1e-3, 0.5])
def test_repair_small_loop(A):
    f = g = Polynomial([0])
    pair = horizontality_repair(Gap(0.2, 0.5), f, g, A, 1)
    assert pair.case == "SmallLoop"
    assert len(pair.phi) == 1 and len(pair.psi) == 1
    assert _quad_residual(pair, f, g, A) < 1e-12 * (1 + abs(A))
    assert pair.flatness < 1e-12


def test_repair_small_loop_with_background_slope():
    # small slopes stay below the threshold, so the loop must absorb them
    f, g = Polynomial([0, 1e-9]), Polynomial([0, -2e-9])
    cons = ExtensionConstants.from_kappas([1.0, 1.0], 1.0)
    pair = horizontality_repair(Gap(0, 0.4), f, g, 1e-4, 1, constants=cons, guard=False)
    assert pair.case == "SmallLoop"
    assert _quad_residual(pair, f, g, 1e-4) < 1e-15


@settings(max_examples=25)
@given(st.floats(-1, 1).filter(lambda a: abs(a) > 1e-6), st.floats(0.5, 3), st.integers(1, 3))
def test_repair_residual_property(A, slope, m):
    f, g = Polynomial([0, slope, 0.3]), Polynomial([0.1, -0.2])
    pair = horizontality_repair(Gap(0, 1), f, g, A, m)
    assert _quad_residual(pair, f, g, A) < 1e-10 * (1 + abs(A))
    # bumps vanish to all computed orders at the gap ends
    for b in pair.phi + pair.psi:
        assert np.max(np.abs(b.derivs(np.array([0.0, 1.0]), m))) < 1e-12


def test_repair_guard_rejects_large_deficit():
    cons = ExtensionConstants.from_kappas([1.0, 1.0], 1.0)
    L = cons.c[1] / 2
    f = g = Polynomial([0])
    with pytest.raises(AdmissibilityError) as info:
        horizontality_repair(Gap(0, L), f, g, 1.0, 1, constants=cons)
    assert info.value.gap == Gap(0, L)
    assert info.value.implied_av_bound > 1.0
    # without the guard the same repair is built
    pair = horizontality_repair(Gap(0, L), f, g, 1.0, 1, constants=cons, guard=False)
    assert not pair.guard_applied


def test_repair_rejects_nonfinite_deficit():
    with pytest.raises(DomainError):
        horizontality_repair(Gap(0, 1), Polynomial([0]), Polynomial([0]), math.nan, 1)


def test_gap_requires_order():
    with pytest.raises(DomainError):
        Gap(1.0, 1.0)


# -------------------------------------------------------------- constants

def test_constants_schedule():
    cons = ExtensionConstants.from_kappas([1.0, 1.0, 1.0, 1.0], 1.0)
    assert cons.m_max == 3
    assert all(a > b for a, b in zip(cons.c, cons.c[1:]))
    assert all(a < b for a, b in zip(cons.C, cons.C[1:]))
    assert cons.order_for(cons.c[2], 3) == 2
    assert cons.order_for(cons.c[0] * 2, 3) is None
    assert cons.order_for(cons.c[3] / 2, 1) == 1
    assert cons.threshold(1, 0.5, LIN) == pytest.approx(cons.C[1] * 0.25)
    assert cons.to_json()["c"] == list(cons.c)


def test_constants_grow_with_kappa():
    small = ExtensionConstants.from_kappas([1.0, 1.0], 1.0)
    big = ExtensionConstants.from_kappas([1.0, 50.0], 1.0)
    assert big.c[1] < small.c[1]


# ----------------------------------------------------------- full curve

def test_extend_circle_audit():
    gamma = circle_lift().uniform_jets(9, 2)
    curve = extend_horizontal(gamma, LIN)
    a = curve.audit
    assert a["residual_max"] < 1e-9
    assert a["residual_fd_max"] < 1e-6
    assert a["jet_match_abs"] < 1e-9
    assert a["closure_max"] < 1e-10


def test_single_long_gap():
    F = poly_jet([0, 1], [0, 1], 1)
    G = ScalarJet([0, 1], 1, [[0, 0], [0, 0]])
    gamma = horizontal_triple(F, G, [0.0, 0.3])
    curve = extend_horizontal(gamma, LIN, av_limit=None)
    assert curve.audit["residual_max"] < 1e-9
    assert curve.evaluate(np.array([1.0]))[2, 0] == pytest.approx(0.3, abs=1e-12)
    assert curve.repairs[0].case in ("FBig", "SmallLoop")


def test_extension_rejects_each_condition():
    K = np.linspace(0, 1, 6)
    # (1): a jump in F^1 that no C^1 field can carry under the Whitney bound
    F = ScalarJet(K, 1, [K, [1, 1, 1, -50, 1, 1]])
    G = ScalarJet(K, 1, [np.zeros(6), np.zeros(6)])
    with pytest.raises(ValidationError) as info:
        extend_horizontal(horizontal_triple(F, G, np.zeros(6)), LIN, cmw_limit=100)
    assert info.value.condition == 1
    # (2): vertical jet off the Leibniz value
    gamma = circle_lift().uniform_jets(6, 1)
    H = gamma.H.data.copy()
    H[1, 2] += 0.1
    bad = HorizontalJetTriple(gamma.F, gamma.G, ScalarJet(gamma.K, 1, H))
    with pytest.raises(ValidationError) as info:
        extend_horizontal(bad, LIN)
    assert info.value.condition == 2
    # (3): vertical line
    with pytest.raises(ValidationError) as info:
        extend_horizontal(vertical_line().uniform_jets(12, 1), LIN)
    assert info.value.condition == 3
    assert info.value.report.max_ratio > 100


def test_tilted_circle_builds_with_repairs():
    gamma = tilted_circle().uniform_jets(9, 1)
    curve = extend_horizontal(gamma, LIN, av_limit=None)
    assert curve.audit["residual_max"] < 1e-8
    assert any(r.phi or r.psi for r in curve.repairs.values())


@settings(max_examples=8)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_left_translation_commutes(px, py, pz):
    p = HPoint(px, py, pz)
    gamma = tilted_circle().uniform_jets(7, 1)
    base = extend_horizontal(gamma, LIN, av_limit=None)
    moved = extend_horizontal(gamma.translated(p), LIN, av_limit=None)
    t = np.linspace(0, 1, 31)
    P = base.evaluate(t)
    Q = moved.evaluate(t)
    expect = np.array([P[0] + px, P[1] + py, P[2] + pz + 2 * (py * P[0] - px * P[1])])
    assert np.allclose(Q, expect, atol=1e-9)
    assert moved.audit["residual_max"] < 1e-8


def test_cinfty_order_one_equals_horizontal():
    gamma = circle_lift().uniform_jets(9, 1)
    a = extend_cinfty(gamma, m_max=1)
    b = extend_horizontal(gamma, LIN)
    t = np.linspace(0, 1, 57)
    assert np.allclose(a.evaluate(t), b.evaluate(t), atol=1e-14)


def test_cinfty_rejects_bad_order():
    gamma = circle_lift().uniform_jets(5, 2)
    for bad in (0, 3):
        with pytest.raises(DomainError):
            extend_cinfty(gamma, m_max=bad)


def test_json_and_rows():
    gamma = cubic_lift().uniform_jets(5, 2)
    curve = extend_horizontal(gamma, LIN)
    obj = curve.to_json()
    assert obj["m"] == 2
    assert len(obj["pieces"]) == 4
    assert obj["pieces"][1]["gap"] == [0.25, 0.5]
    rows = curve.sample_rows(50)
    assert rows.shape[1] == 5
    assert np.all(np.diff(rows[:, 0]) > 0)
    assert np.max(np.abs(rows[:, 4])) < 1e-9
    exact = cubic_lift().values(rows[:, 0])
    assert np.allclose(rows[:, 1:4], exact, atol=1e-10)
