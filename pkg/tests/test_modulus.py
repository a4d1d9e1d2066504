import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from heiswhitney.errors import DomainError, InconsistentDataError
from heiswhitney.modulus import ModulusOfContinuity, holder_seminorm


def test_linear_and_power_values():
    assert ModulusOfContinuity.linear()(0.3) == 0.3
    assert ModulusOfContinuity.power(0.5)(0.25) == pytest.approx(0.5)
    np.testing.assert_allclose(ModulusOfContinuity.power(0.5)(np.array([0.0, 4.0])), [0.0, 2.0])


@pytest.mark.parametrize("alpha", [0.0, -0.5, 1.5])
def test_power_rejects_bad_exponent(alpha):
    with pytest.raises(DomainError):
        ModulusOfContinuity.power(alpha)


def test_negative_argument_and_cap():
    with pytest.raises(DomainError):
        ModulusOfContinuity.linear()(-1e-3)
    with pytest.raises(DomainError):
        ModulusOfContinuity.linear(domain_cap=1.0)(2.0)


def test_table_interpolates_and_extends_with_last_slope():
    w = ModulusOfContinuity.table([(1.0, 1.0), (2.0, 1.5)])
    assert w(0.5) == pytest.approx(0.5)
    assert w(1.5) == pytest.approx(1.25)
    assert w(3.0) == pytest.approx(2.0)


def test_table_rejects_nonconcave_knots_and_names_them():
    with pytest.raises(InconsistentDataError, match="not concave"):
        ModulusOfContinuity.table([(1.0, 1.0), (2.0, 3.0)])
    with pytest.raises(InconsistentDataError, match="decreases"):
        ModulusOfContinuity.table([(1.0, 1.0), (2.0, 0.5)])
    with pytest.raises(InconsistentDataError):
        ModulusOfContinuity.table([(0.0, 0.1), (1.0, 1.0)])


def test_json_round_trip_and_parse(tmp_path):
    for w in (ModulusOfContinuity.linear(), ModulusOfContinuity.power(0.3),
              ModulusOfContinuity.table([(0.5, 1.0), (1.0, 1.5)])):
        back = ModulusOfContinuity.from_json(json.loads(json.dumps(w.to_json())))
        assert back == w
        assert back(0.7) == w(0.7)
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"knots": [[0.5, 1.0], [1.0, 1.5]]}))
    assert ModulusOfContinuity.parse(f"table:{path}")(0.25) == pytest.approx(0.5)
    assert ModulusOfContinuity.parse("power:0.5").alpha == 0.5
    with pytest.raises(DomainError):
        ModulusOfContinuity.parse("quadratic")


@st.composite
def concave_tables(draw):
    n = draw(st.integers(1, 6))
    widths = draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n))
    slopes = sorted(draw(st.lists(st.floats(0.0, 5.0), min_size=n, max_size=n)), reverse=True)
    t = np.cumsum(widths)
    w = np.cumsum(np.array(widths) * np.array(slopes))
    return list(zip(t.tolist(), w.tolist()))


@given(concave_tables(), st.floats(0, 5), st.floats(0, 5), st.floats(0, 1))
def test_table_is_monotone_and_concave(knots, s, t, lam):
    w = ModulusOfContinuity.table(knots)
    lo, hi = min(s, t), max(s, t)
    assert w(lo) <= w(hi) + 1e-12
    mid = lam * s + (1 - lam) * t
    assert w(mid) >= lam * w(s) + (1 - lam) * w(t) - 1e-9 * (1 + w(hi))


@given(st.floats(0.05, 1.0), st.floats(0, 3), st.floats(0, 3))
def test_power_modulus_is_subadditive(alpha, s, t):
    w = ModulusOfContinuity.power(alpha)
    assert w(s + t) <= w(s) + w(t) + 1e-12


def test_holder_seminorm_brute_force():
    # derivative of |x|^1.5 is 1.5 sign(x) |x|^0.5
    vals = [(x, 1.5 * math.copysign(abs(x) ** 0.5, x)) for x in (-1.0, 0.0, 1.0)]
    w = ModulusOfContinuity.power(0.5)
    expect = max(abs(v - u) / math.sqrt(abs(y - x)) for x, u in vals for y, v in vals if x != y)
    assert holder_seminorm(vals, w) == pytest.approx(expect)
    # the outer pair wins, not the pairs through 0 (which give 1.5)
    assert expect == pytest.approx(3 / math.sqrt(2))


def test_holder_seminorm_trivial_cases():
    lin = ModulusOfContinuity.linear()
    assert holder_seminorm([(x, x) for x in (0.0, 0.5, 1.0)], lin, m=1) == pytest.approx(1.0)
    assert holder_seminorm([(x, 2.0) for x in (0.0, 0.3, 1.0)], lin) == 0.0


def test_holder_seminorm_repeated_points():
    w = ModulusOfContinuity.linear()
    assert holder_seminorm([(0, 1), (0, 1), (1, 3)], w) == 2.0
    with pytest.raises(InconsistentDataError):
        holder_seminorm([(0, 1), (0, 2), (1, 3)], w)
    with pytest.raises(DomainError):
        holder_seminorm([(0, 1)], w)
