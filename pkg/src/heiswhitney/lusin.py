"""Lusin approximation of densely sampled horizontal curves.

The interval is cut into equal cells. At each cell center the derivatives
``f'`` and ``g'`` get a local polynomial fit whose averaged L1 residual on
dyadic balls gives a local constant; integrating the fits gives jets of
``f`` and ``g`` and the Leibniz rule gives ``h``. Cells whose constants are
too large at the selected parameter ``N`` (or whose fitted coefficients
jump compared with their neighbours) are discarded, and the remaining
cell centers carry the jet data handed to the extension engine.

Every measure statement here is a grid statement: the deficit is the total
length of discarded cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CoverageError, DomainError, ResolutionError, ValidationError
from .extension import extend_cinfty, extend_horizontal
from .heisenberg import SampledCurve, finite_difference
from .jets import HorizontalJetTriple, SampleSet, ScalarJet
from .modulus import ModulusOfContinuity

RHO_LEVELS = 6
MIN_BALL_SAMPLES = 16
DEFAULT_CELLS = 150
DEFAULT_RHO0 = 0.08  # fraction of the domain length
DEFAULT_AREA_TOL = 1e-6
OUTLIER_FACTOR = 20.0
FIT_METHOD = "trapezoid-weighted least squares on the smallest ball"


@dataclass(frozen=True)
class L1wEstimate:
    """Local polynomial ``sum_k coefficients[k] (y - x)^k`` and its constant.

    ``profile`` holds ``(rho, ratio)`` with ratio the ball-averaged L1
    residual over ``omega(rho) rho^m``; ``C_local`` is its maximum.
    """

    x: float
    m: int
    coefficients: tuple
    C_local: float
    rho_used: float
    profile: tuple = ()
    method: str = FIT_METHOD

    def derivatives(self) -> np.ndarray:
        """Jet values ``k! a_k`` for ``k = 0..m``."""
        return np.array([math.factorial(k) * c for k, c in enumerate(self.coefficients)])

    def constant_up_to(self, rho_cap: float) -> float:
        """Largest profile ratio over ``rho <= rho_cap`` (the smallest ball always counts)."""
        if not self.profile:
            return self.C_local
        rhos = np.array([p[0] for p in self.profile])
        vals = np.array([p[1] for p in self.profile])
        keep = (rhos <= rho_cap) | (rhos == rhos.min())
        return float(vals[keep].max())

    def to_json(self) -> dict:
        return {"x": self.x, "m": self.m, "coefficients": list(self.coefficients),
                "C_local": self.C_local, "rho_used": self.rho_used,
                "profile": [list(p) for p in self.profile], "method": self.method}


def dyadic_rho_grid(rho0: float, levels: int = RHO_LEVELS) -> np.ndarray:
    return rho0 * 2.0 ** -np.arange(levels)


def _ball(t, u, x, rho):
    """Samples in ``[x - rho, x + rho]``.

    Only genuine samples are used so that polynomial data is reproduced
    exactly; averages are taken over the span the samples cover.
    """
    i0, i1 = np.searchsorted(t, [x - rho, x + rho], side="left")
    if i1 < t.size and t[i1] == x + rho:
        i1 += 1
    return t[i0:i1], u[i0:i1], i1 - i0


def _trapezoid_weights(y):
    w = np.zeros(y.size)
    d = np.diff(y)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


def l1w_estimate(grid, values, x: float, m: int, omega: ModulusOfContinuity | None = None,
                 rho_grid=None) -> L1wEstimate:
    """Local order-``m`` polynomial for samples ``values`` near ``x``.

    The polynomial is the trapezoid-weighted least-squares fit on the
    smallest ball of ``rho_grid``; its constant is the largest averaged L1
    residual over ``omega(rho) rho^m`` across the grid.
    """
    omega = omega or ModulusOfContinuity.linear()
    t = np.asarray(grid, dtype=float)
    u = np.asarray(values, dtype=float)
    if m < 0:
        raise DomainError("order must be nonnegative")
    if rho_grid is None:
        rho_grid = dyadic_rho_grid(DEFAULT_RHO0 * (t[-1] - t[0]))
    rhos = np.sort(np.asarray(rho_grid, dtype=float))[::-1]
    if rhos.size == 0 or rhos[-1] <= 0:
        raise DomainError("rho grid must hold positive radii")
    if x - rhos[0] < t[0] or x + rhos[0] > t[-1]:
        raise DomainError(f"ball of radius {rhos[0]:g} around {x} leaves the sampled interval")
    rho_min = rhos[-1]
    y, v, count = _ball(t, u, x, rho_min)
    if count < MIN_BALL_SAMPLES:
        raise ResolutionError(f"only {count} samples within {rho_min:g} of {x}; "
                              f"need {MIN_BALL_SAMPLES}")
    s = (y - x) / rho_min
    sw = np.sqrt(_trapezoid_weights(y))
    V = np.vander(s, m + 1, increasing=True)
    c, *_ = np.linalg.lstsq(V * sw[:, None], v * sw, rcond=None)
    coeffs = c / rho_min ** np.arange(m + 1)
    profile = []
    for rho in rhos:
        yb, vb, _ = _ball(t, u, x, rho)
        fit = np.polyval(coeffs[::-1], yb - x)
        avg = np.trapezoid(np.abs(vb - fit), yb) / (yb[-1] - yb[0])
        profile.append((float(rho), float(avg / (omega(rho) * rho ** m))))
    C = max(p[1] for p in profile)
    return L1wEstimate(float(x), m, tuple(coeffs.tolist()), C, float(rho_min), tuple(profile))


def integrate_l1w(est: L1wEstimate, fx: float) -> L1wEstimate:
    """Order-``m+1`` estimate of ``f`` from an order-``m`` estimate of ``f'``.

    The averaged error at most doubles: ``|f - Q| <= int_B |f' - P|``.
    """
    coeffs = [float(fx)] + [a / (k + 1) for k, a in enumerate(est.coefficients)]
    profile = tuple((r, 2.0 * v) for r, v in est.profile)
    return L1wEstimate(est.x, est.m + 1, tuple(coeffs), 2.0 * est.C_local, est.rho_used,
                       profile, est.method)


def vertical_l1w(f_est: L1wEstimate, g_est: L1wEstimate) -> L1wEstimate:
    """Order-``m-1`` estimate of ``h'`` from ``R = 2 (P' Q - Q' P)``.

    ``R`` is truncated to degree ``m - 1`` in ``y - x``. The constant is an
    indicative propagation for balls of radius at most 1: the input
    constants weighted by the coefficient sizes of the other factor, plus
    the size of the truncated tail.
    """
    if f_est.x != g_est.x or f_est.m != g_est.m:
        raise DomainError("estimates must share the point and the order")
    m = f_est.m
    if m < 1:
        raise DomainError("the vertical estimate needs order at least 1")
    P = np.array(f_est.coefficients)
    Q = np.array(g_est.coefficients)
    dP = P[1:] * np.arange(1, m + 1)
    dQ = Q[1:] * np.arange(1, m + 1)
    R = 2.0 * (np.convolve(dP, Q) - np.convolve(dQ, P))
    kept, tail = R[:m], R[m:]
    C = 2.0 * (f_est.C_local * np.abs(Q).sum() + g_est.C_local * np.abs(P).sum()) \
        + float(np.abs(tail).sum())
    return L1wEstimate(f_est.x, m - 1, tuple(kept.tolist()), float(C), f_est.rho_used, (),
                       "truncated Leibniz product of the f and g estimates")


# ------------------------------------------------------- parameter selection

@dataclass
class UniformParameterReport:
    N: int
    A_N: np.ndarray
    C: float
    rho0: float
    discarded_measure: float
    kept: np.ndarray
    history: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"N": self.N, "A_N": self.A_N.tolist(), "C": self.C, "rho0": self.rho0,
                "discarded_measure": self.discarded_measure,
                "history": [list(h) for h in self.history]}


def cell_edges(domain, cells: int) -> np.ndarray:
    return np.linspace(domain[0], domain[1], cells + 1)


def parameter_mask(estimates, N: int, domain) -> np.ndarray:
    """Membership in ``A_N``: margin ``1/N`` inside the domain and constant ``<= N``.

    ``estimates`` holds one :class:`L1wEstimate` (or ``None`` where no
    estimate exists) per cell; only balls of radius ``<= 1/N`` count.
    """
    a, b = domain
    r = 1.0 / N
    out = np.zeros(len(estimates), dtype=bool)
    for j, est in enumerate(estimates):
        if est is None:
            continue
        if est.x - r <= a or est.x + r >= b:
            continue
        out[j] = est.constant_up_to(r) <= N
    return out


def uniform_parameter_set(estimates, N_schedule, target: float, domain,
                          widths=None) -> UniformParameterReport:
    """Smallest ``N`` in the schedule whose discarded cell measure is below ``target``."""
    schedule = sorted(int(n) for n in N_schedule)
    if not schedule:
        raise CoverageError("empty N schedule", achieved=None)
    if widths is None:
        widths = np.full(len(estimates), (domain[1] - domain[0]) / len(estimates))
    widths = np.asarray(widths, dtype=float)
    history, best = [], math.inf
    for N in schedule:
        if N <= 0:
            raise DomainError("N must be positive")
        mask = parameter_mask(estimates, N, domain)
        lost = float(widths[~mask].sum())
        history.append((N, lost))
        best = min(best, lost)
        if lost < target:
            xs = np.array([e.x for e, k in zip(estimates, mask) if k])
            return UniformParameterReport(N, xs, float(N), 1.0 / N, lost, mask, history)
    raise CoverageError(f"no N in the schedule discards less than {target:g} "
                        f"(best {best:g})", achieved=best)


# ------------------------------------------------------------- pipeline

@dataclass
class LusinResult:
    K: SampleSet
    curve: object
    agreement_measure_deficit: float
    epsilon_target: float
    orders: tuple = ()
    parameter_reports: list = field(default_factory=list)
    discarded_cells: list = field(default_factory=list)
    margin_measure: float = 0.0
    agreement_error: float = 0.0
    note: str = ""

    @property
    def success(self) -> bool:
        return self.agreement_measure_deficit < self.epsilon_target

    def defect_cells(self):
        """Discarded cells other than the boundary margins."""
        return [c for c in self.discarded_cells if c[2] != "margin"]

    def to_json(self) -> dict:
        return {"K": self.K.points.tolist(), "orders": list(self.orders),
                "agreement_measure_deficit": self.agreement_measure_deficit,
                "epsilon_target": self.epsilon_target, "success": self.success,
                "margin_measure": self.margin_measure, "agreement_error": self.agreement_error,
                "discarded_cells": [list(c) for c in self.discarded_cells],
                "parameter_reports": [r.to_json() for r in self.parameter_reports],
                "fit_method": FIT_METHOD, "note": self.note,
                "curve": None if self.curve is None else self.curve.to_json()}


def cell_area_residual(curve: SampledCurve, edges) -> np.ndarray:
    """Per-cell ``|dh - 2 int (g df - f dg)|`` divided by the cell length.

    The integral is a trapezoid Stieltjes sum, so corners in ``f`` or ``g``
    cost no differencing error.
    """
    t, f, g, h = curve.grid, curve.f, curve.g, curve.h
    df, dg = np.diff(f), np.diff(g)
    fm, gm = 0.5 * (f[:-1] + f[1:]), 0.5 * (g[:-1] + g[1:])
    cum = np.concatenate([[0.0], np.cumsum(df * gm - dg * fm)])
    idx = np.searchsorted(t, edges)
    idx = np.clip(idx, 0, t.size - 1)
    area = h[idx[1:]] - h[idx[:-1]] - 2.0 * (cum[idx[1:]] - cum[idx[:-1]])
    return np.abs(area) / np.maximum(t[idx[1:]] - t[idx[:-1]], 1e-300)


def _centers(t, edges):
    mid = 0.5 * (edges[:-1] + edges[1:])
    idx = np.clip(np.searchsorted(t, mid), 1, t.size - 1)
    left = t[idx - 1]
    idx = np.where(np.abs(mid - left) <= np.abs(t[idx] - mid), idx - 1, idx)
    return idx


class _CellEstimates:
    """Order-``m`` estimates of ``f``, ``g`` and ``h'`` at every cell center."""

    def __init__(self, curve: SampledCurve, cells: int, omega, rho0):
        t = curve.grid
        self.curve = curve
        self.domain = (float(t[0]), float(t[-1]))
        self.edges = cell_edges(self.domain, cells)
        self.widths = np.diff(self.edges)
        self.idx = _centers(t, self.edges)
        self.x = t[self.idx]
        self.omega = omega
        L = self.domain[1] - self.domain[0]
        self.rhos = dyadic_rho_grid((DEFAULT_RHO0 if rho0 is None else rho0) * L)
        self.df = finite_difference(t, curve.f)
        self.dg = finite_difference(t, curve.g)
        self._cache = {}

    def at_order(self, m: int):
        if m in self._cache:
            return self._cache[m]
        t, c = self.curve.grid, self.curve
        out = []
        for j, x in zip(self.idx, self.x):
            # radii whose balls stay inside the samples; the smallest is shared
            rhos = self.rhos[(x - self.rhos >= t[0]) & (x + self.rhos <= t[-1])]
            if rhos.size == 0 or rhos.min() != self.rhos.min():
                out.append(None)
                continue
            ef = integrate_l1w(l1w_estimate(t, self.df, x, m - 1, self.omega, rhos), c.f[j])
            eg = integrate_l1w(l1w_estimate(t, self.dg, x, m - 1, self.omega, rhos), c.g[j])
            out.append((ef, eg, vertical_l1w(ef, eg)))
        self._cache[m] = out
        return out


def _combined(pairs):
    """Per-cell estimate whose profile is the worse of the ``f`` and ``g`` profiles."""
    out = []
    for p in pairs:
        if p is None:
            out.append(None)
            continue
        ef, eg, _ = p
        prof = tuple((r, max(a, b)) for (r, a), (_, b) in zip(ef.profile, eg.profile))
        out.append(L1wEstimate(ef.x, ef.m, ef.coefficients, max(ef.C_local, eg.C_local),
                               ef.rho_used, prof))
    return out


def cell_estimates(curve: SampledCurve, m: int, omega: ModulusOfContinuity | None = None,
                   cells: int = DEFAULT_CELLS, rho0=None):
    """Per-cell estimates used for parameter selection, with the domain and cell widths.

    Returns ``(estimates, domain, widths)``; entries are ``None`` where no ball
    fits inside the samples.
    """
    est = _CellEstimates(curve, cells, omega or ModulusOfContinuity.linear(), rho0)
    return _combined(est.at_order(m)), est.domain, est.widths


def _oscillation(pairs, kept):
    """Largest normalized jump of fitted jets between kept neighbouring cells."""
    n = len(pairs)
    osc = np.zeros(n)
    jets = [None if p is None else np.concatenate([p[0].derivatives(), p[1].derivatives()])
            for p in pairs]
    for j in range(n):
        if not kept[j]:
            continue
        for nb in (j - 1, j + 1):
            if 0 <= nb < n and kept[nb]:
                d = np.abs(jets[j] - jets[nb]) / (1.0 + np.abs(jets[j]))
                osc[j] = max(osc[j], float(d.max()))
    return osc


def _select(est: _CellEstimates, m: int, budget: float, schedule):
    """Cells kept at order ``m`` within ``budget``: half for ``A_N``, half for trimming."""
    pairs = est.at_order(m)
    rep = uniform_parameter_set(_combined(pairs), schedule, 0.5 * budget, est.domain, est.widths)
    kept = rep.kept.copy()
    reasons = {}
    for j in np.flatnonzero(~kept):
        e = pairs[j]
        margin = e is None or e[0].x - 1.0 / rep.N <= est.domain[0] \
            or e[0].x + 1.0 / rep.N >= est.domain[1]
        reasons[int(j)] = "margin" if margin else "constant"
    osc = _oscillation(pairs, kept)
    live = osc[kept]
    if live.size:
        limit = OUTLIER_FACTOR * float(np.median(live)) + 1e-12
        spent = 0.0
        for j in np.argsort(-osc, kind="stable"):
            if osc[j] <= limit or spent + est.widths[j] >= 0.5 * budget:
                break
            kept[j] = False
            reasons[int(j)] = "oscillation"
            spent += est.widths[j]
    return kept, reasons, rep


def _jets_from(pairs, kept):
    sel = [p for p, k in zip(pairs, kept) if k]
    K = SampleSet([p[0].x for p in sel])
    m = sel[0][0].m
    F = np.array([p[0].derivatives() for p in sel]).T
    G = np.array([p[1].derivatives() for p in sel]).T
    Hk = np.array([p[2].derivatives() for p in sel]).T  # derivatives of h', orders 0..m-1
    return K, m, F, G, Hk


def _build_triple(curve, est, pairs, kept):
    K, m, F, G, Hk = _jets_from(pairs, kept)
    j = est.idx[kept]
    H = np.vstack([curve.h[j][None, :], Hk])
    return HorizontalJetTriple(ScalarJet(K, m, F), ScalarJet(K, m, G), ScalarJet(K, m, H))


def _agreement_error(curve, gamma_tilde, edges, kept):
    """Max ``|Gamma~ - Gamma|`` over samples inside kept cells."""
    t = curve.grid
    cell = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, kept.size - 1)
    sel = kept[cell]
    if not np.any(sel):
        return 0.0
    vals = gamma_tilde.evaluate(t[sel], 0)
    ref = np.stack([curve.f[sel], curve.g[sel], curve.h[sel]])
    return float(np.max(np.abs(vals - ref)))


def _precondition(curve, edges, tol):
    res = cell_area_residual(curve, edges)
    if res.max() > tol:
        j = int(np.argmax(res))
        raise ValidationError(
            2, f"input is not horizontal: cell [{edges[j]:.6g}, {edges[j + 1]:.6g}] "
               f"has area residual {res[j]:.3e} > {tol:g}")


def _trivial(curve, est, m, epsilon, orders):
    """``epsilon`` exceeds the domain length: keep only the outermost estimable cells."""
    pairs = est.at_order(m)
    avail = [j for j, p in enumerate(pairs) if p is not None]
    if len(avail) < 2:
        raise CoverageError("no two cells admit an estimate", achieved=None)
    kept = np.zeros(len(pairs), dtype=bool)
    kept[[avail[0], avail[-1]]] = True
    gamma = _build_triple(curve, est, pairs, kept)
    out = extend_horizontal(gamma, est.omega, est.domain, av_limit=None)
    lost = float(est.widths[~kept].sum())
    cells = [(float(est.edges[j]), float(est.edges[j + 1]), "margin")
             for j in np.flatnonzero(~kept)]
    return LusinResult(gamma.K, out, lost, epsilon, orders, [], cells, lost,
                       _agreement_error(curve, out, est.edges, kept),
                       "epsilon exceeds the domain length; only two cells kept")


def _default_schedule(cells):
    return range(1, 40 * cells + 1)


def lusin_approximate(curve: SampledCurve, m: int, omega: ModulusOfContinuity | None = None,
                      epsilon: float = 0.1, *, cells: int = DEFAULT_CELLS, rho0=None,
                      N_schedule=None, area_tol: float = DEFAULT_AREA_TOL) -> LusinResult:
    """Horizontal ``C^{m,omega}`` curve agreeing with the samples off a small set of cells."""
    omega = omega or ModulusOfContinuity.linear()
    if m < 1:
        raise DomainError("order must be at least 1")
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    est = _CellEstimates(curve, cells, omega, rho0)
    _precondition(curve, est.edges, area_tol)
    if epsilon > est.domain[1] - est.domain[0]:
        return _trivial(curve, est, m, epsilon, (m,))
    schedule = N_schedule if N_schedule is not None else _default_schedule(cells)
    kept, reasons, rep = _select(est, m, epsilon, schedule)
    return _finish(curve, est, m, kept, reasons, [rep], epsilon, (m,),
                   lambda g: extend_horizontal(g, omega, est.domain, av_limit=None))


def _finish(curve, est, m, kept, reasons, reports, epsilon, orders, build):
    if kept.sum() < 2:
        raise CoverageError("fewer than two cells survive the selection",
                            achieved=float(est.widths[~kept].sum()))
    gamma = _build_triple(curve, est, est.at_order(m), kept)
    out = build(gamma)
    lost = float(est.widths[~kept].sum())
    cells = [(float(est.edges[j]), float(est.edges[j + 1]), reasons.get(int(j), "margin"))
             for j in np.flatnonzero(~kept)]
    margin = float(sum(c[1] - c[0] for c in cells if c[2] == "margin"))
    return LusinResult(gamma.K, out, lost, epsilon, orders, reports, cells, margin,
                       _agreement_error(curve, out, est.edges, kept))


def lusin_cinfty(curve: SampledCurve, m_max: int, epsilon: float = 0.1, *,
                 cells: int = DEFAULT_CELLS, rho0=None, N_schedule=None,
                 area_tol: float = DEFAULT_AREA_TOL) -> LusinResult:
    """Truncated ``C^infty`` version: order ``m`` may discard ``epsilon / 2^m``.

    The last order also receives the unused tail ``epsilon / 2^m_max`` so the
    budgets sum to ``epsilon``; the kept set is the intersection over orders.
    """
    if m_max < 1:
        raise DomainError("m_max must be at least 1")
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    omega = ModulusOfContinuity.linear()
    est = _CellEstimates(curve, cells, omega, rho0)
    _precondition(curve, est.edges, area_tol)
    orders = tuple(range(1, m_max + 1))
    if epsilon > est.domain[1] - est.domain[0]:
        return _trivial(curve, est, m_max, epsilon, orders)
    schedule = N_schedule if N_schedule is not None else _default_schedule(cells)
    kept = np.ones(cells, dtype=bool)
    reasons, reports = {}, []
    for m in orders:
        budget = epsilon / 2.0 ** m + (epsilon / 2.0 ** m_max if m == m_max else 0.0)
        k_m, r_m, rep = _select(est, m, budget, schedule)
        for j, why in r_m.items():
            if kept[j]:
                reasons[j] = f"{why}@{m}" if why != "margin" else why
        kept &= k_m
        reports.append(rep)
    return _finish(curve, est, m_max, kept, reasons, reports, epsilon, orders,
                   lambda g: extend_cinfty(g, est.domain, m_max, av_limit=None))
