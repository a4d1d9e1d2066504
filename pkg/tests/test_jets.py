import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from heiswhitney.errors import DomainError, InconsistentDataError
from heiswhitney.heisenberg import HPoint
from heiswhitney.jets import (HorizontalJetTriple, SampleSet, ScalarJet, cm_decay_diagnostic,
                              remainder, validate_cmw)
from heiswhitney.modulus import ModulusOfContinuity

LIN = ModulusOfContinuity.linear()
GRID = np.linspace(0, 1, 5)


def poly_jet(coeffs, K, m):
    P = np.polynomial.Polynomial(coeffs)
    return ScalarJet.from_derivatives(K, [P.deriv(k) for k in range(m + 1)])


def brute_constant(F, omega):
    best = 0.0
    for a in F.K.points:
        for x in F.K.points:
            if a == x:
                continue
            for k in range(F.m + 1):
                d = abs(x - a)
                best = max(best, abs(remainder(F, a, x, k)) / (omega(d) * d ** (F.m - k)))
    return best


def test_sample_set_and_jet_validation():
    with pytest.raises(DomainError):
        SampleSet([0.0])
    with pytest.raises(DomainError):
        SampleSet([0.0, 1.0, 0.5])
    with pytest.raises(InconsistentDataError):
        ScalarJet(SampleSet([0, 1]), 1, [[0, 1]])
    with pytest.raises(DomainError):
        SampleSet([0, 1]).index(0.5)


def test_remainder_examples():
    sq = poly_jet([0, 0, 1], GRID, 2)
    for a in GRID:
        for x in GRID:
            for k in range(3):
                assert remainder(sq, a, x, k) == pytest.approx(0.0, abs=1e-15)
    cube = poly_jet([0, 0, 0, 1], GRID, 2)
    assert remainder(cube, 0.0, 1.0, 0) == pytest.approx(1.0)
    assert remainder(cube, 0.5, 0.5, 1) == 0.0
    # the top order is a plain difference
    assert remainder(cube, 0.25, 1.0, 2) == pytest.approx(6 * 1.0 - 6 * 0.25)


def test_validate_cmw_examples():
    assert validate_cmw(poly_jet([0, 0, 1], GRID, 2), LIN).best_constant == pytest.approx(0, abs=1e-12)
    cube = validate_cmw(poly_jet([0, 0, 0, 1], GRID, 2), LIN)
    # |R^0| = |b - a|^3 gives 1; the top order |6b - 6a| / |b - a| gives 6
    assert cube.per_order[0] == pytest.approx(1.0)
    assert cube.best_constant == pytest.approx(6.0)
    single = ScalarJet(SampleSet([0, 1]), 2, [[0, 5], [0, 0], [0, 0]])
    assert validate_cmw(single, LIN).best_constant == pytest.approx(5.0)


@given(st.lists(st.floats(-3, 3), min_size=3, max_size=6), st.integers(0, 3),
       st.sampled_from([ModulusOfContinuity.linear(), ModulusOfContinuity.power(0.5)]))
def test_validate_cmw_matches_brute_force(coeffs, m, omega):
    K = SampleSet(np.array([0.0, 0.1, 0.35, 0.5, 0.9]))
    F = poly_jet(coeffs, K, m)
    rep = validate_cmw(F, omega, with_profile=False)
    assert rep.best_constant == pytest.approx(brute_constant(F, omega), rel=1e-9, abs=1e-12)
    a, b, k = rep.worst_witness
    d = abs(b - a)
    if rep.best_constant > 0:
        assert abs(remainder(F, a, b, k)) / (omega(d) * d ** (m - k)) == \
            pytest.approx(rep.best_constant, rel=1e-9)


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=3))
def test_adding_low_degree_polynomial_leaves_constant_unchanged(extra):
    K = SampleSet(np.linspace(0, 1, 9))
    F = ScalarJet.from_derivatives(K, [lambda x, k=k: np.sin(x + k * math.pi / 2) for k in range(3)])
    P = poly_jet(extra, K, 2)
    G = ScalarJet(K, 2, F.data + P.data)
    assert validate_cmw(G, LIN).best_constant == pytest.approx(validate_cmw(F, LIN).best_constant,
                                                                rel=1e-6)


def test_decay_diagnostic():
    K = SampleSet(np.linspace(0, 1, 64))
    assert cm_decay_diagnostic(poly_jet([0, 0, 1], K, 2)).trend == "vanishing"
    cube = cm_decay_diagnostic(poly_jet([0, 0, 0, 1], K, 2))
    assert cube.trend == "decaying"
    # the top-order normalized remainder equals 6|b - a|, which is exactly the bin scale
    for scale, value in cube.as_pairs():
        assert scale <= value / 6 * (1 + 1e-9) <= 2 * scale
    step = ScalarJet(K, 1, [np.where(K.points < 0.5, 0.0, 1.0), np.zeros(64)])
    assert cm_decay_diagnostic(step).trend == "non-decaying"
    with pytest.raises(DomainError):
        cm_decay_diagnostic(poly_jet([1], SampleSet([0, 1, 2]), 0))


def test_triple_translation_and_json():
    from heiswhitney.suite import circle_lift

    g = circle_lift().uniform_jets(6, 3)
    assert g.leibniz_defect() < 1e-14 and g.leibniz_consistent
    moved = g.translated(HPoint(1.0, -2.0, 0.5))
    assert moved.leibniz_defect() < 1e-13
    back = HorizontalJetTriple.from_json(g.to_json())
    np.testing.assert_array_equal(back.H.data, g.H.data)
    assert g.truncate(1).m == 1
    with pytest.raises(InconsistentDataError):
        HorizontalJetTriple(g.F, g.G, g.H.truncate(2))
