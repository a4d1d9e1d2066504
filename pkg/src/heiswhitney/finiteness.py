"""Finiteness-principle checks on (m+2)-point subsets.

For each scanned ``X`` with ``#X = m + 2`` the candidate extension is the
interpolating polynomial of ``f`` and ``g`` on ``X``. Its ``m``-th derivative
is affine with slope ``(m+1)! f[X]``, so its ``C^{m,omega}`` seminorm on the
hull of ``X`` is ``(m+1)! |f[X]| diam / omega(diam)`` (``t / omega(t)`` is
nondecreasing). Together with the discrete A/V ratios on the ``(m+1)``-point
subsets of ``X`` this gives the per-subset bound whose maximum is ``M``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .area_velocity import (DEFAULT_SUBSET_BUDGET, _values3, av_ratio_scan,
                            discrete_av_scan, ratio_of_constants, subset_av_rows,
                            subset_family)
from .errors import DomainError
from .modulus import ModulusOfContinuity
from .polynomials import divided_differences

SURROGATE = ("interpolating polynomials of f and g on X; h taken from the data; "
             "seminorm = (m+1)! |top divided difference| diam / omega(diam)")
QUANTITIES = ("f_seminorm", "g_seminorm", "av_ratio")


@dataclass
class FinitenessReport:
    M_estimate: float
    witnesses: list
    subsets_scanned: int
    exhaustive: bool
    maxima: dict = field(default_factory=dict)
    h_seminorm: float = 0.0
    by_diameter: list = field(default_factory=list)
    surrogate: str = SURROGATE

    def to_json(self) -> dict:
        return {
            "M_estimate": self.M_estimate,
            "witnesses": [[list(X), q, v] for X, q, v in self.witnesses],
            "subsets_scanned": self.subsets_scanned,
            "exhaustive": self.exhaustive,
            "maxima": dict(self.maxima),
            "h_seminorm": self.h_seminorm,
            "surrogate": self.surrogate,
            "note": "finite K: every point is isolated, so the isolated-points "
                    "hypothesis holds trivially and carries no information",
        }


class _Best:
    """Running maximum with ties broken by the lexicographically smallest ``X``."""

    def __init__(self):
        self.value, self.X = -1.0, None

    def offer(self, value, X):
        if value > self.value or (value == self.value and X < self.X):
            self.value, self.X = value, X


def finiteness_check(K, values, m: int, omega: ModulusOfContinuity | None = None,
                     subset_budget: int = DEFAULT_SUBSET_BUDGET) -> FinitenessReport:
    """Scan ``(m+2)``-point subsets of ``K`` and report the largest bound ``M``.

    ``values`` holds ``(f, g, h)`` at each point of ``K``. The seminorm of the
    ``h`` interpolant is reported separately and left out of ``M``: ``h`` is
    not determined by ``f`` and ``g`` off ``X`` and its divided differences
    are not translation invariant.
    """
    omega = omega or ModulusOfContinuity.linear()
    x = np.asarray(getattr(K, "points", K), dtype=float)
    if m < 0:
        raise DomainError("order must be nonnegative")
    if x.size < m + 2:
        raise DomainError(f"need #K >= m + 2 = {m + 2}, have {x.size}")
    vals = _values3(values, x.size)
    subsets, exhaustive = subset_family(x.size, m + 2, subset_budget, x)
    fact = math.factorial(m + 1)
    best = {q: _Best() for q in QUANTITIES + ("h_seminorm",)}
    subs = sorted({sub for S in subsets for sub in itertools.combinations(S, m + 1)})
    if m >= 1:
        _, A, V = subset_av_rows(x, vals, subs, omega)
        sub_max = dict(zip(subs, np.max(np.abs(A) / V, axis=1).tolist()))
    else:
        sub_max = dict.fromkeys(subs, 0.0)
    by_diam = []
    for S in subsets:
        idx = list(S)
        X = tuple(x[idx].tolist())
        diam = X[-1] - X[0]
        scale = fact * diam / omega(diam)
        semis = [scale * abs(divided_differences(x[idx], vals[idx, c])[-1]) for c in range(3)]
        av = max(sub_max[sub] for sub in itertools.combinations(S, m + 1))
        for q, v in zip(QUANTITIES + ("h_seminorm",), semis[:2] + [av, semis[2]]):
            best[q].offer(v, X)
        by_diam.append((diam, max(semis[0], semis[1], av)))
    maxima = {q: max(best[q].value, 0.0) for q in QUANTITIES}
    M = max(maxima.values())
    top = sorted(QUANTITIES, key=lambda q: (-maxima[q], q))
    witnesses = [(best[q].X, q, maxima[q]) for q in top]
    return FinitenessReport(M, witnesses, len(subsets), exhaustive, maxima,
                            max(best["h_seminorm"].value, 0.0), sorted(by_diam))


def equivalence_audit(gamma, omega: ModulusOfContinuity | None = None,
                      subset_budget: int = DEFAULT_SUBSET_BUDGET):
    """Continuous and discrete A/V scans on the same jets, and how far apart they are."""
    omega = omega or ModulusOfContinuity.linear()
    cont = av_ratio_scan(gamma, omega)
    vals = np.column_stack([gamma.F.data[0], gamma.G.data[0], gamma.H.data[0]])
    disc = discrete_av_scan(gamma.K, vals, gamma.m, omega, subset_budget)
    return cont, disc, ratio_of_constants(cont.max_ratio, disc.max_ratio)
