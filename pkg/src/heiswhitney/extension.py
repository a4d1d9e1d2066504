"""Horizontal extension of jet data from a finite set to an interval.

Pipeline, per gap ``(a_i, b_i)`` between consecutive sample points:

1. ``f`` and ``g`` blend the Taylor polynomials at both ends with the flat
   step ``chi``; outside the hull of ``K`` the end Taylor polynomial is used.
2. ``h`` starts at ``H^0(a_i)`` and integrates ``2 (f' g - f g')``. The
   deficit ``H^0(b_i) - h(b_i^-)`` is the area the repair must create.
3. Bumps ``phi``, ``psi`` supported inside the gap are added to ``f``, ``g``
   so that ``4 int (psi f' - phi g' + psi phi')`` equals the deficit; the
   repaired ``h`` then closes up at ``b_i``.

All derivatives of the result come from exact piece formulas: Taylor
polynomials, power-series derivatives of ``chi`` and the bumps, and the
Leibniz rule for ``h``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .area_velocity import av_ratio_scan
from .errors import AdmissibilityError, DomainError, ResolutionError, ValidationError
from .jets import HorizontalJetTriple, ScalarJet, validate_cmw
from .modulus import ModulusOfContinuity
from .polynomials import Polynomial, integral_abs, taylor_local
from .smooth import (Bump, adaptive_panels, bump_derivative_maxima, gl_on,
                     integrate, smoothstep_derivs)

DEFAULT_AV_LIMIT = 100.0
DEFAULT_LEIBNIZ_TOL = 1e-8
QUAD_TOL = 1e-13
BUMP_MIDDLE_FLOOR = math.exp(-1.0 / (1.0 - 1.0 / 9.0))
LOOP_SUPPORTS = ((0.1, 0.7), (0.3, 0.9))
AUDIT_POINTS_PER_GAP = 10


@dataclass(frozen=True)
class Gap:
    lo: float
    hi: float
    index: int = 0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError("a gap needs lo < hi")

    @property
    def length(self) -> float:
        return self.hi - self.lo


# ------------------------------------------------------------ scalar blends

class ScalarExtension:
    """Chi-blended Taylor extension of a scalar jet, plus optional bumps.

    Gap ``i`` is ``[x_i, x_{i+1}]``; index ``-1`` is the left outer segment
    and ``n - 1`` the right one.
    """

    def __init__(self, F: ScalarJet, domain=None, perturbations=None):
        self.F = F
        self.x = F.K.points
        lo, hi = F.K.hull
        self.domain = (lo, hi) if domain is None else (float(domain[0]), float(domain[1]))
        if self.domain[0] > lo or self.domain[1] < hi:
            raise DomainError("the sample set must lie inside the extension interval")
        self._polys = {}
        self.perturbations = dict(perturbations or {})

    def with_perturbations(self, perturbations) -> "ScalarExtension":
        out = ScalarExtension.__new__(ScalarExtension)
        out.F, out.x, out.domain, out._polys = self.F, self.x, self.domain, self._polys
        out.perturbations = dict(perturbations)
        return out

    def _dpoly(self, i: int, k: int) -> np.ndarray:
        """Ascending monomial coefficients of ``(T_{x_i} F)^(k)`` in ``u = t - x_i``."""
        key = (i, k)
        if key not in self._polys:
            self._polys[key] = taylor_local(self.F.data[:, i]).deriv(k).coeffs
        return self._polys[key]

    def _taylor(self, i, k, u):
        c = self._dpoly(i, k)
        acc = np.full(u.shape, c[-1])
        for ck in c[-2::-1]:
            acc = acc * u + ck
        return acc

    def gap_derivs(self, i: int, t, order: int = 0, perturbed: bool = True) -> np.ndarray:
        """Derivatives ``0..order`` on gap ``i`` at points ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        n = self.x.size
        out = np.zeros((order + 1, t.size))
        if i < 0 or i >= n - 1:
            j = 0 if i < 0 else n - 1
            u = t - self.x[j]
            for k in range(order + 1):
                out[k] = self._taylor(j, k, u)
            return out
        a, b = self.x[i], self.x[i + 1]
        L = b - a
        chi = smoothstep_derivs((t - a) / L, order)
        Ta = [self._taylor(i, k, t - a) for k in range(order + 1)]
        D = [self._taylor(i + 1, k, t - b) - Ta[k] for k in range(order + 1)]
        for k in range(order + 1):
            acc = Ta[k].copy()
            for j in range(k + 1):
                acc += math.comb(k, j) * chi[j] / L ** j * D[k - j]
            out[k] = acc
        if perturbed:
            for bump in self.perturbations.get(i, ()):
                out += bump.derivs(t, order)
        return out

    def locate(self, t, side: str = "right") -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any(t < self.domain[0]) or np.any(t > self.domain[1]):
            raise DomainError(f"evaluation outside [{self.domain[0]}, {self.domain[1]}]")
        return np.searchsorted(self.x, t, side=side) - 1

    def derivs(self, t, order: int = 0, side: str = "right") -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx = self.locate(t, side)
        out = np.zeros((order + 1, t.size))
        for i in np.unique(idx):
            sel = idx == i
            out[:, sel] = self.gap_derivs(int(i), t[sel], order)
        return out

    def __call__(self, t):
        v = self.derivs(t, 0)[0]
        return float(v[0]) if np.ndim(t) == 0 else v


def whitney_extend_scalar(F: ScalarJet, I=None) -> ScalarExtension:
    """Blend Taylor polynomials across gaps with the flat step ``chi``."""
    return ScalarExtension(F, I)


# --------------------------------------------------------- vertical coordinate

def _bracket(fd, gd):
    return fd[1] * gd[0] - fd[0] * gd[1]


def _leibniz_rows(fd, gd, order):
    """``h^(k)`` for ``k = 1..order`` from derivatives of ``f`` and ``g``."""
    rows = []
    for k in range(1, order + 1):
        acc = np.zeros(fd.shape[1])
        for i in range(k):
            acc += math.comb(k - 1, i) * (fd[k - i] * gd[i] - gd[k - i] * fd[i])
        rows.append(2.0 * acc)
    return rows


@dataclass
class _GapTable:
    """Cumulative quadrature table for ``int_{a}^{t} bracket`` on one gap."""

    edges: np.ndarray
    cumulative: np.ndarray

    def integral_to(self, fun, t):
        j = np.clip(np.searchsorted(self.edges, t, side="right") - 1, 0, self.edges.size - 2)
        out = self.cumulative[j].copy()
        part = t > self.edges[j]
        if np.any(part):
            out[part] += gl_on(fun, self.edges[j][part], t[part])
        return out


def _gap_breakpoints(a, b, bumps):
    pts = [a + (b - a) * q for q in (0.25, 0.5, 0.75)]
    for bump in bumps:
        pts.extend([bump.lo, 0.5 * (bump.lo + bump.hi), bump.hi])
    return pts


def vertical_redefine(f: ScalarExtension, g: ScalarExtension, H0, gaps=None):
    """Per-gap deficits ``H0(b) - H0(a) - 2 int_a^b (f' g - f g')``.

    ``gaps`` is an iterable of gap indices (all interior gaps by default).
    Returns a dict ``index -> deficit``.
    """
    H0 = np.asarray(H0, dtype=float)
    n = f.x.size
    out = {}
    for i in (range(n - 1) if gaps is None else gaps):
        a, b = f.x[i], f.x[i + 1]

        def br(t, i=i):
            return _bracket(f.gap_derivs(i, t, 1, perturbed=False),
                            g.gap_derivs(i, t, 1, perturbed=False))

        val = integrate(br, a, b, QUAD_TOL, _gap_breakpoints(a, b, ()))
        out[i] = float(H0[i + 1] - H0[i] - 2.0 * val)
    return out


# --------------------------------------------------------------- constants

@lru_cache(maxsize=None)
def loop_coupling() -> float:
    """``int eta_2 eta_1'`` for the unit bumps used by the small-loop repair.

    Computed on ``[0, 1]``; the value is invariant under affine rescaling.
    """
    (p1, q1), (p2, q2) = LOOP_SUPPORTS
    e1, e2 = Bump(p1, q1), Bump(p2, q2)
    return integrate(lambda t: e2.derivs(t, 0)[0] * e1.derivs(t, 1)[1], p2, q1, 1e-14)


@dataclass(frozen=True)
class ExtensionConstants:
    """Per-order repair constants and the derived gap-size schedule ``c_m``."""

    kappa: tuple
    C: tuple
    C_prime: tuple
    c: tuple
    measured: bool = True

    @classmethod
    def from_kappas(cls, kappas, diam: float, measured: bool = True) -> "ExtensionConstants":
        kappas = [float(k) for k in kappas]
        m_max = len(kappas) - 1
        B = bump_derivative_maxima(m_max)
        coupling = abs(loop_coupling())
        span = max(1.0, float(diam))
        C, Cp, c = [], [], []
        prev = 1.0
        for m, kap in enumerate(kappas):
            mm = max(m, 1)
            growth = max((36.0 * mm * mm) ** i * B[i] for i in range(m + 1))
            Cm = 48.0 * mm * mm / BUMP_MIDDLE_FLOOR * growth * span ** m
            loop_amp = math.sqrt(kap * (1.0 + 2.0 * kap * Cm) / (4.0 * coupling))
            loop_growth = max(B[i] * (2.0 / 0.6) ** i for i in range(m + 1))
            Cpm = max(1.0, loop_amp * loop_growth * span ** m / 6.0)
            tilde = max(kap * Cm, 6.0 * Cpm, prev + 1.0)
            prev = tilde
            C.append(Cm)
            Cp.append(Cpm)
            c.append(1.0 / tilde ** 2)
        return cls(tuple(kappas), tuple(C), tuple(Cp), tuple(c), measured)

    @property
    def m_max(self) -> int:
        return len(self.kappa) - 1

    def threshold(self, m: int, L: float, omega: ModulusOfContinuity) -> float:
        return self.kappa[m] * self.C[m] * omega(L) * L ** m

    def order_for(self, L: float, m_cap: int):
        """Largest ``m <= m_cap`` with ``L <= c_m``, or ``None``."""
        for m in range(min(m_cap, self.m_max), -1, -1):
            if L <= self.c[m]:
                return m
        return None

    def to_json(self) -> dict:
        return {"kappa": list(self.kappa), "C": list(self.C), "C_prime": list(self.C_prime),
                "c": list(self.c), "measured": self.measured}


# ------------------------------------------------------------------ repair

@dataclass
class PerturbationPair:
    """Bumps added to ``f`` (``phi``) and ``g`` (``psi``) on one gap."""

    gap: Gap
    phi: tuple
    psi: tuple
    case: str
    area_deficit: float
    lam: float
    order: int
    residual: float = 0.0
    flatness: float = 0.0
    sup_norms: np.ndarray = field(default_factory=lambda: np.zeros(1))
    guard_applied: bool = False

    @property
    def sup_norm(self) -> float:
        return float(np.max(self.sup_norms)) if self.sup_norms.size else 0.0

    def phi_derivs(self, t, order=0):
        return _sum_bumps(self.phi, t, order)

    def psi_derivs(self, t, order=0):
        return _sum_bumps(self.psi, t, order)

    def to_json(self) -> dict:
        return {"gap": [self.gap.lo, self.gap.hi], "case": self.case,
                "area_deficit": self.area_deficit, "lambda": self.lam, "order": self.order,
                "phi": [b.to_json() for b in self.phi], "psi": [b.to_json() for b in self.psi],
                "residual": self.residual, "sup_norm": self.sup_norm,
                "guard_applied": self.guard_applied}


def _sum_bumps(bumps, t, order):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros((order + 1, t.size))
    for b in bumps:
        out += b.derivs(t, order)
    return out


def _deriv_fn(obj):
    """Normalize ``f`` to a callable ``(t, order) -> (order+1, n)``."""
    if isinstance(obj, Polynomial):
        def fn(t, order, P=obj):
            t = np.atleast_1d(np.asarray(t, dtype=float))
            return np.array([P.deriv(k)(t) for k in range(order + 1)])
        return fn
    if hasattr(obj, "derivs"):
        return obj.derivs
    if callable(obj):
        return obj
    raise DomainError("f and g must be polynomials or expose derivs(t, order)")


def _sign_intervals(dfun, a, b, samples=401):
    """Maximal subintervals of ``[a, b]`` on which ``dfun`` keeps one strict sign."""
    t = np.linspace(a, b, samples)
    v = dfun(t)
    sgn = np.sign(v)
    cuts = [a]
    for j in range(samples - 1):
        if sgn[j] != sgn[j + 1]:
            if sgn[j] == 0:
                cuts.append(t[j])
            elif sgn[j + 1] == 0:
                cuts.append(t[j + 1])
            else:
                cuts.append(brentq(lambda s: float(dfun(np.array([s]))[0]), t[j], t[j + 1],
                                   xtol=1e-15 * (b - a)))
    cuts.append(b)
    out = []
    for p, q in zip(cuts[:-1], cuts[1:]):
        if q > p and np.sign(dfun(np.array([0.5 * (p + q)]))[0]) != 0:
            out.append((p, q))
    return out


def _single_bump_case(fn, a, b, m, A, sign):
    """Place one bump where ``fn'`` keeps its sign; ``None`` when too short."""
    L = b - a
    d1 = lambda t: fn(t, 1)[1]
    intervals = _sign_intervals(d1, a, b)
    if not intervals:
        return None
    vals0 = lambda t: fn(np.atleast_1d(t), 0)[0]
    best = max(intervals, key=lambda pq: abs(vals0(pq[1])[0] - vals0(pq[0])[0]))
    p, q = best
    ell = q - p
    lo, hi = p + 0.1 * ell, q - 0.1 * ell
    mm = max(m, 1)
    if hi - lo < L / (18.0 * mm * mm):
        return None
    eta = Bump(lo, hi)
    I = integrate(lambda t: eta.derivs(t, 0)[0] * d1(t), lo, hi, QUAD_TOL)
    if abs(I) <= 1e-300 or not math.isfinite(A / I):
        return None
    lam = sign * A / (4.0 * I)
    return Bump(lo, hi, lam), lam


def _small_loop(fn_f, fn_g, a, b, A):
    L = b - a
    (p1, q1), (p2, q2) = LOOP_SUPPORTS
    e1 = Bump(a + p1 * L, a + q1 * L)
    e2 = Bump(a + p2 * L, a + q2 * L)
    c = loop_coupling()
    s = 1.0 if A * c >= 0 else -1.0
    P = integrate(lambda t: e2.derivs(t, 0)[0] * fn_f(t, 1)[1], e2.lo, e2.hi, QUAD_TOL)
    Q = integrate(lambda t: e1.derivs(t, 0)[0] * fn_g(t, 1)[1], e1.lo, e1.hi, QUAD_TOL)
    # 4 s c lam^2 + 4 (s P - Q) lam - A = 0; take the root nearest zero
    qa, qb, qc = 4.0 * s * c, 4.0 * (s * P - Q), -A
    disc = qb * qb - 4.0 * qa * qc
    if qb == 0.0:
        lam = math.sqrt(-qc / qa)
    else:
        qq = -0.5 * (qb + math.copysign(math.sqrt(disc), qb))
        lam = qc / qq
    for _ in range(2):
        val = qa * lam * lam + qb * lam + qc
        slope = 2.0 * qa * lam + qb
        if slope == 0.0:
            break
        lam -= val / slope
    return (Bump(e1.lo, e1.hi, lam),), (Bump(e2.lo, e2.hi, s * lam),), lam


def repair_residual(fn_f, fn_g, phi, psi, a, b, A, tol=QUAD_TOL) -> float:
    """``|4 int (psi f' - phi g' + psi phi') - A|`` by adaptive quadrature."""
    fn_f, fn_g = _deriv_fn(fn_f), _deriv_fn(fn_g)
    bumps = tuple(phi) + tuple(psi)
    if not bumps:
        return abs(A)

    def integrand(t):
        ph = _sum_bumps(phi, t, 1)
        ps = _sum_bumps(psi, t, 1)
        return ps[0] * fn_f(t, 1)[1] - ph[0] * fn_g(t, 1)[1] + ps[0] * ph[1]

    lo = min(bb.lo for bb in bumps)
    hi = max(bb.hi for bb in bumps)
    val = integrate(integrand, lo, hi, tol, _gap_breakpoints(lo, hi, bumps))
    return abs(4.0 * val - A)


def horizontality_repair(gap: Gap, f, g, A: float, m: int,
                         omega: ModulusOfContinuity | None = None,
                         constants: ExtensionConstants | None = None,
                         guard: bool = True) -> PerturbationPair:
    """Bumps ``phi``, ``psi`` on ``gap`` solving ``4 int (psi f' - phi g' + psi phi') = A``.

    The regime follows the size of ``int |(T_a f)'|`` and ``int |(T_a g)'|``
    against ``kappa_m C_m omega(L) L^m``. When ``constants`` is given and
    ``L <= c_m`` the sup norms of derivatives ``0..m`` must stay below
    ``sqrt(L)``; otherwise :class:`AdmissibilityError` is raised.
    """
    omega = omega or ModulusOfContinuity.linear()
    fn_f, fn_g = _deriv_fn(f), _deriv_fn(g)
    a, b = gap.lo, gap.hi
    L = gap.length
    A = float(A)
    if not math.isfinite(A):
        raise DomainError("area deficit must be finite")
    Tf = taylor_local(fn_f(np.array([a]), m)[:, 0]).deriv()
    Tg = taylor_local(fn_g(np.array([a]), m)[:, 0]).deriv()
    IF = integral_abs(Tf, 0.0, L)
    IG = integral_abs(Tg, 0.0, L)
    tau = constants.threshold(min(m, constants.m_max), L, omega) if constants else 0.0
    if IF > 0 and IF >= max(IG, tau):
        case = "FBig"
    elif IG > 0 and IG >= max(IF, tau):
        case = "GBig"
    else:
        case = "SmallLoop"

    phi, psi, lam = (), (), 0.0
    if A != 0.0:
        placed = None
        if case == "FBig":
            placed = _single_bump_case(fn_f, a, b, m, A, 1.0)
            if placed is not None:
                psi, lam = (placed[0],), placed[1]
        elif case == "GBig":
            placed = _single_bump_case(fn_g, a, b, m, A, -1.0)
            if placed is not None:
                phi, lam = (placed[0],), placed[1]
        if placed is None:
            case = "SmallLoop"
            phi, psi, lam = _small_loop(fn_f, fn_g, a, b, A)

    bumps = phi + psi
    sup = np.zeros(m + 1)
    for bb in bumps:
        sup = np.maximum(sup, bb.sup_norms(m))
    flat = 0.0
    if bumps:
        ends = np.array([a, b])
        flat = float(max(np.max(np.abs(bb.derivs(ends, m))) for bb in bumps))
    residual = repair_residual(fn_f, fn_g, phi, psi, a, b, A)
    pair = PerturbationPair(gap, phi, psi, case, A, lam, m, residual, flat, sup)
    if residual > 1e-9 * (1.0 + abs(A)):
        raise ResolutionError(f"repair residual {residual:.3e} on gap [{a}, {b}]")
    if flat > 1e-10:
        raise ResolutionError(f"repair bumps not flat at the ends of gap [{a}, {b}]")
    if constants is not None and guard and m <= constants.m_max and L <= constants.c[m]:
        pair.guard_applied = True
        if pair.sup_norm > math.sqrt(L):
            w = omega(L)
            V = w * w * L ** (2 * m) + w * L ** m * (IF + IG)
            raise AdmissibilityError(
                f"repair on gap [{a}, {b}] needs sup norm {pair.sup_norm:.3e} > sqrt(L)",
                gap=gap, implied_av_bound=abs(A) / V if V > 0 else math.inf)
    return pair


# ------------------------------------------------------------------ curve

class PiecewiseSmoothCurve:
    """Extension ``(f, g, h)`` with exact derivatives on every piece."""

    def __init__(self, jets: HorizontalJetTriple, f: ScalarExtension, g: ScalarExtension,
                 repairs: dict, tables: dict, omega, constants, m: int):
        self.jets = jets
        self.K = jets.K
        self.f = f
        self.g = g
        self.repairs = repairs
        self._tables = tables
        self.omega = omega
        self.constants = constants
        self.m = m
        self.domain = f.domain
        self.audit = {}

    def _bracket_fn(self, i):
        return lambda t: _bracket(self.f.gap_derivs(i, t, 1), self.g.gap_derivs(i, t, 1))

    def _h_values(self, i, t):
        x = self.K.points
        H0 = self.jets.H.data[0]
        n = x.size
        if i < 0 or i >= n - 1:
            j = 0 if i < 0 else n - 1
            Bint = self._tables[i]
            return H0[j] + 2.0 * Bint(t - x[j])
        return H0[i] + 2.0 * self._tables[i].integral_to(self._bracket_fn(i), t)

    def derivs(self, t, order: int = 0, side: str = "right") -> np.ndarray:
        """Array of shape ``(3, order + 1, n)`` with derivatives of f, g, h."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx = self.f.locate(t, side)
        out = np.zeros((3, order + 1, t.size))
        for i in np.unique(idx):
            sel = idx == i
            ts = t[sel]
            fd = self.f.gap_derivs(int(i), ts, order)
            gd = self.g.gap_derivs(int(i), ts, order)
            out[0, :, sel] = fd.T
            out[1, :, sel] = gd.T
            out[2, 0, sel] = self._h_values(int(i), ts)
            for k, row in enumerate(_leibniz_rows(fd, gd, order), start=1):
                out[2, k, sel] = row
        return out

    def evaluate(self, t, k: int = 0, side: str = "right") -> np.ndarray:
        return self.derivs(t, k, side)[:, k, :]

    def __call__(self, t):
        return self.evaluate(t, 0)

    def audit_grid(self, per_gap: int = AUDIT_POINTS_PER_GAP) -> np.ndarray:
        x = self.K.points
        inner = [np.linspace(a, b, per_gap + 2)[1:-1] for a, b in zip(x[:-1], x[1:])]
        return np.unique(np.concatenate([x] + inner))

    def run_audit(self, per_gap: int = AUDIT_POINTS_PER_GAP) -> dict:
        from .heisenberg import horizontality_residual

        grid = self.audit_grid(per_gap)
        res, _ = horizontality_residual(self, grid)
        J = np.stack([self.jets.F.data, self.jets.G.data, self.jets.H.data])
        m = self.m
        worst_abs, worst_rel = 0.0, 0.0
        per_order = [0.0] * (m + 1)
        for side in ("right", "left"):
            D = self.derivs(self.K.points, m, side)
            err = np.abs(D - J[:, : m + 1, :])
            worst_abs = max(worst_abs, float(err.max()))
            worst_rel = max(worst_rel, float((err / (1.0 + np.abs(J[:, : m + 1, :]))).max()))
            for k in range(m + 1):
                per_order[k] = max(per_order[k], float(err[:, k, :].max()))
        closure = 0.0
        x = self.K.points
        H0 = self.jets.H.data[0]
        for i in range(x.size - 1):
            closure = max(closure, abs(self._h_values(i, np.array([x[i + 1]]))[0] - H0[i + 1]))
        self.audit = {"residual_max": res, "residual_fd_max": self._fd_residual(grid),
                      "jet_match_abs": worst_abs,
                      "jet_match_rel": worst_rel, "jet_match_by_order": per_order,
                      "closure_max": closure, "grid_points": int(grid.size)}
        return self.audit

    def _fd_residual(self, grid) -> float:
        """Residual with ``h'`` from a five-point difference of the integrated ``h``.

        Independent of the Leibniz rows: it checks that the stored ``h``
        really integrates the bracket. The flat blends have large high
        derivatives on short gaps, hence the fourth-order stencil. Points
        whose stencil would cross a sample point are skipped.
        """
        x = self.K.points
        step = 1e-3 * float(np.min(np.diff(x)))
        k = np.searchsorted(x, grid)
        near = np.minimum(np.abs(grid - x[np.clip(k - 1, 0, x.size - 1)]),
                          np.abs(grid - x[np.clip(k, 0, x.size - 1)]))
        t = grid[near > 2.5 * step]
        if t.size == 0:
            return 0.0
        h = lambda s: self.evaluate(s)[2]
        hp = (8.0 * (h(t + step) - h(t - step)) - (h(t + 2 * step) - h(t - 2 * step))) / (12 * step)
        D = self.derivs(t, 1)
        r = hp - 2.0 * (D[0, 1] * D[1, 0] - D[0, 0] * D[1, 1])
        return float(np.max(np.abs(r)))

    def seminorm_report(self, samples_per_gap: int = 8) -> dict:
        """Empirical ``C^{m,omega}`` seminorm of each coordinate on a dense grid."""
        from .modulus import holder_seminorm

        grid = self.audit_grid(samples_per_gap)
        if grid.size > 600:
            grid = grid[np.linspace(0, grid.size - 1, 600).astype(int)]
        D = self.evaluate(grid, self.m)
        return {name: holder_seminorm(list(zip(grid, D[c])), self.omega, self.m)
                for c, name in enumerate("fgh")}

    def to_json(self) -> dict:
        x = self.K.points
        pieces = []
        for i in range(x.size - 1):
            rep = self.repairs.get(i)
            pieces.append({
                "gap": [float(x[i]), float(x[i + 1])],
                "taylor_left": {"f": self.jets.F.data[:, i].tolist(),
                                "g": self.jets.G.data[:, i].tolist()},
                "taylor_right": {"f": self.jets.F.data[:, i + 1].tolist(),
                                 "g": self.jets.G.data[:, i + 1].tolist()},
                "repair": None if rep is None else rep.to_json(),
            })
        return {"domain": list(self.domain), "m": self.m, "omega": self.omega.to_json(),
                "jets": self.jets.to_json(), "pieces": pieces,
                "constants": None if self.constants is None else self.constants.to_json(),
                "audit": self.audit}

    def sample_rows(self, resolution: int = 1000):
        """Rows ``(t, x, y, z, residual)`` on a uniform grid plus ``K``."""
        t = np.unique(np.concatenate([np.linspace(*self.domain, resolution), self.K.points]))
        D = self.derivs(t, 1)
        f, g, h = D[0, 0], D[1, 0], D[2, 0]
        r = D[2, 1] - 2.0 * (D[0, 1] * g - f * D[1, 1])
        return np.column_stack([t, f, g, h, r])


# ------------------------------------------------------------- validation

def check_conditions(gamma: HorizontalJetTriple, omega: ModulusOfContinuity,
                     av_limit=DEFAULT_AV_LIMIT, leibniz_tol=DEFAULT_LEIBNIZ_TOL,
                     cmw_limit=math.inf, orders=None) -> dict:
    """Check conditions (1)-(3); raise :class:`ValidationError` on failure.

    Returns the measured Whitney and A/V constants per order.
    """
    orders = [gamma.m] if orders is None else list(orders)
    out = {"whitney": {}, "av": {}}
    for m in orders:
        jets = gamma.truncate(m)
        for name, J in (("F", jets.F), ("G", jets.G), ("H", jets.H)):
            rep = validate_cmw(J, omega, with_profile=False)
            out["whitney"][(m, name)] = rep.best_constant
            if not math.isfinite(rep.best_constant) or rep.best_constant > cmw_limit:
                raise ValidationError(
                    1, f"{name} jet of order {m} has Whitney constant {rep.best_constant:.6g}",
                    report=rep)
    defect = gamma.leibniz_defect()
    out["leibniz_defect"] = defect
    if defect > leibniz_tol:
        raise ValidationError(2, f"vertical jet differs from the Leibniz value by {defect:.3e}")
    for m in orders:
        rep = av_ratio_scan(gamma.truncate(m), omega)
        out["av"][m] = rep
        if av_limit is not None and rep.max_ratio > av_limit:
            raise ValidationError(
                3, f"A/V ratio {rep.max_ratio:.6g} exceeds {av_limit:g} at order {m} "
                   f"(witness {rep.witness})", report=rep)
    return out


# --------------------------------------------------------------- assembly

def _gap_velocity(gamma, i, m, omega):
    """``V^m`` on gap ``i`` from the order-``m`` Taylor polynomials at its left end."""
    x = gamma.K.points
    L = x[i + 1] - x[i]
    Tf = taylor_local(gamma.F.data[: m + 1, i]).deriv()
    Tg = taylor_local(gamma.G.data[: m + 1, i]).deriv()
    w = omega(L)
    return w * w * L ** (2 * m) + w * L ** m * (integral_abs(Tf, 0.0, L) + integral_abs(Tg, 0.0, L))


def _assemble(gamma, omega, I, m_cap, av_scans, guard=True, audit=True, constants=None):
    f = whitney_extend_scalar(gamma.F, I)
    g = whitney_extend_scalar(gamma.G, I)
    H0 = gamma.H.data[0]
    x = gamma.K.points
    n = x.size
    deficits = vertical_redefine(f, g, H0)

    if constants is None:
        for m in range(m_cap + 1):
            if m not in av_scans:
                av_scans[m] = av_ratio_scan(gamma.truncate(m), omega)
        kappas = []
        for m in range(m_cap + 1):
            k = av_scans[m].max_ratio
            for i, A in deficits.items():
                V = _gap_velocity(gamma, i, m, omega)
                if V > 0:
                    k = max(k, abs(A) / V)
            kappas.append(k)
        constants = ExtensionConstants.from_kappas(kappas, gamma.K.diam)

    repairs, fp, gp = {}, {}, {}
    for i in range(n - 1):
        L = x[i + 1] - x[i]
        m = constants.order_for(L, m_cap)
        guarded = m is not None and guard
        m = m_cap if m is None else m
        pair = horizontality_repair(Gap(x[i], x[i + 1], i),
                                    lambda t, k, i=i: f.gap_derivs(i, t, k, perturbed=False),
                                    lambda t, k, i=i: g.gap_derivs(i, t, k, perturbed=False),
                                    deficits[i], m, omega, constants, guard=guarded)
        repairs[i] = pair
        if pair.phi:
            fp[i] = pair.phi
        if pair.psi:
            gp[i] = pair.psi
    f = f.with_perturbations(fp)
    g = g.with_perturbations(gp)

    tables = {}
    for i in range(n - 1):
        a, b = x[i], x[i + 1]
        bumps = fp.get(i, ()) + gp.get(i, ())

        def br(t, i=i):
            return _bracket(f.gap_derivs(i, t, 1), g.gap_derivs(i, t, 1))

        edges, vals = adaptive_panels(br, a, b, QUAD_TOL, _gap_breakpoints(a, b, bumps))
        tables[i] = _GapTable(edges, np.concatenate([[0.0], np.cumsum(vals)]))
    for i, j in ((-1, 0), (n - 1, n - 1)):
        Tf = taylor_local(gamma.F.data[:, j])
        Tg = taylor_local(gamma.G.data[:, j])
        tables[i] = (Tf.deriv() * Tg - Tg.deriv() * Tf).antideriv()

    curve = PiecewiseSmoothCurve(gamma, f, g, repairs, tables, omega, constants, gamma.m)
    if audit:
        curve.run_audit()
    return curve


def extend_horizontal(gamma: HorizontalJetTriple, omega: ModulusOfContinuity | None = None,
                      I=None, *, av_limit=DEFAULT_AV_LIMIT, leibniz_tol=DEFAULT_LEIBNIZ_TOL,
                      cmw_limit=math.inf, check: bool = True, audit: bool = True,
                      constants: ExtensionConstants | None = None) -> PiecewiseSmoothCurve:
    """Horizontal ``C^{m,omega}`` curve through the jets ``gamma``.

    Preconditions are checked first and reported as :class:`ValidationError`
    naming the failing condition. ``av_limit=None`` skips the A/V bound
    (the ratio is still measured for the repair constants).
    """
    omega = omega or ModulusOfContinuity.linear()
    if check:
        info = check_conditions(gamma, omega, av_limit, leibniz_tol, cmw_limit)
        scans = info["av"]
    else:
        scans = {}
    return _assemble(gamma, omega, I, gamma.m, scans, audit=audit, constants=constants)


def extend_cinfty(gamma: HorizontalJetTriple, I=None, m_max: int | None = None, *,
                  av_limit=DEFAULT_AV_LIMIT, leibniz_tol=DEFAULT_LEIBNIZ_TOL,
                  check: bool = True, audit: bool = True) -> PiecewiseSmoothCurve:
    """Truncated ``C^infty`` extension with the measured ``c_m`` schedule.

    Each gap is repaired at the largest order ``m <= m_max`` with
    ``L <= c_m`` (and at ``m_max`` without the sup-norm guard when no order
    qualifies). Conditions are validated at every order ``1..m_max`` with
    the linear modulus.
    """
    m_max = gamma.m if m_max is None else int(m_max)
    if not 1 <= m_max <= gamma.m:
        raise DomainError(f"m_max must lie in 1..{gamma.m}")
    gamma = gamma.truncate(m_max)
    omega = ModulusOfContinuity.linear()
    if check:
        info = check_conditions(gamma, omega, av_limit, leibniz_tol, orders=range(1, m_max + 1))
        scans = info["av"]
    else:
        scans = {}
    return _assemble(gamma, omega, I, m_max, scans, audit=audit)
