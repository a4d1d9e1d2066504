"""Analytic test curves: horizontal lifts and deliberately broken ones."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .heisenberg import SampledCurve, leibniz_vertical_jet
from .jets import HorizontalJetTriple, SampleSet, ScalarJet
from .polynomials import Polynomial


@dataclass(frozen=True)
class AnalyticCurve:
    """A curve with closed-form derivatives ``derivs(t, k) -> (3, n)``."""

    name: str
    derivs: object
    domain: tuple = (0.0, 1.0)
    horizontal: bool = True

    def values(self, t) -> np.ndarray:
        return self.derivs(np.asarray(t, dtype=float), 0).T

    def jets(self, K, m: int) -> HorizontalJetTriple:
        """Jets of order ``m`` on ``K``.

        Defect curves get ``H^k`` (k >= 1) from the Leibniz rule, so their
        jets pass the vertical-jet check and the defect sits in ``H^0`` only.
        """
        K = K if isinstance(K, SampleSet) else SampleSet(K)
        D = np.array([self.derivs(K.points, k) for k in range(m + 1)])  # (m+1, 3, n)
        if not self.horizontal:
            D[:, 2, :] = leibniz_vertical_jet(D[:, 0, :], D[:, 1, :], D[0, 2, :])
        return HorizontalJetTriple(*(ScalarJet(K, m, D[:, c, :]) for c in range(3)))

    def sample(self, grid) -> SampledCurve:
        grid = np.asarray(grid, dtype=float)
        return SampledCurve(grid, self.values(grid))

    def uniform_jets(self, n: int, m: int) -> HorizontalJetTriple:
        return self.jets(np.linspace(*self.domain, n), m)


def _circle(t, k):
    t = np.atleast_1d(t)
    shift = k * math.pi / 2.0
    h = -2.0 * t if k == 0 else np.full(t.shape, -2.0 if k == 1 else 0.0)
    return np.array([np.cos(t + shift), np.sin(t + shift), h])


def polynomial_lift(name, f_coeffs, g_coeffs, h0: float = 0.0) -> AnalyticCurve:
    """Horizontal lift of polynomial ``(f, g)`` with ``h(0) = h0``."""
    f, g = Polynomial(f_coeffs), Polynomial(g_coeffs)
    h = (2.0 * (f.deriv() * g - f * g.deriv())).antideriv(h0)

    def derivs(t, k):
        t = np.atleast_1d(t)
        return np.array([P.deriv(k)(t) for P in (f, g, h)])

    return AnalyticCurve(name, derivs)


def circle_lift() -> AnalyticCurve:
    return AnalyticCurve("circle_lift", _circle)


def cubic_lift() -> AnalyticCurve:
    return polynomial_lift("cubic_lift", [0, 1], [0, 0, 1])


def tilted_circle(tilt: float = 0.25) -> AnalyticCurve:
    """Circle lift with ``h`` sheared off horizontality by ``tilt * t``."""

    def derivs(t, k):
        out = _circle(t, k)
        if k == 0:
            out[2] += tilt * np.atleast_1d(t)
        elif k == 1:
            out[2] += tilt
        return out

    return AnalyticCurve("tilted_circle", derivs, horizontal=False)


def vertical_line() -> AnalyticCurve:
    def derivs(t, k):
        t = np.atleast_1d(t)
        z = np.zeros(t.shape)
        h = t if k == 0 else (np.ones(t.shape) if k == 1 else z)
        return np.array([z, z, h])

    return AnalyticCurve("vertical_line", derivs, horizontal=False)


def corner_curve(corner: float = 0.5) -> AnalyticCurve:
    """``f = |t - corner|``, ``g = t^2`` with its exact horizontal lift.

    Only orders 0 and 1 are available; ``f'`` jumps at the corner.
    """
    c = corner

    def h_of(t):
        # h' = 2 (t^2 - 2 c t) left of the corner and its negative on the right
        t = np.asarray(t, dtype=float)
        left = lambda u: 2.0 * (-(c * u ** 2) + u ** 3 / 3.0)
        right = lambda u: 2.0 * (c * u ** 2 - u ** 3 / 3.0)
        hc = left(c)
        return np.where(t <= c, left(t), hc + right(t) - right(c))

    def derivs(t, k):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        s = np.where(t >= c, 1.0, -1.0)
        if k == 0:
            return np.array([np.abs(t - c), t * t, h_of(t)])
        if k == 1:
            f1, g1 = s, 2.0 * t
            f0, g0 = np.abs(t - c), t * t
            return np.array([f1, g1, 2.0 * (f1 * g0 - f0 * g1)])
        if k == 2:
            return np.array([np.zeros(t.shape), np.full(t.shape, 2.0), -4.0 * np.abs(t - c)])
        raise ValueError("corner curve derivatives are only provided up to order 2")

    return AnalyticCurve("corner_curve", derivs)


def smooth_suite():
    return [
        circle_lift(),
        cubic_lift(),
        polynomial_lift("poly_lift_5", [0, 1, 1], [0, -0.5, 0, 1]),
        polynomial_lift("poly_lift_6", [0.2, -1, 0.5], [0, 0.3, 0, -0.4, 0.25]),
    ]


def defect_suite():
    return [vertical_line(), tilted_circle()]


def all_fixtures():
    return smooth_suite() + defect_suite() + [corner_curve()]


def dense_grid(domain=(0.0, 1.0), n: int = 8193) -> np.ndarray:
    return np.linspace(domain[0], domain[1], n)
