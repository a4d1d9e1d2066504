"""Area discrepancy and omega-velocity, continuous and discrete.

Continuous quantities are built from Taylor polynomials of the jets at the
left endpoint ``a``; discrete ones from Newton interpolants on an
``(m+1)``-point set ``X``. All polynomial work is done in the local variable
``u = x - a`` (or ``u = x - min X``), which keeps the integrals well
conditioned and makes translation in the parameter exact.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InconsistentDataError
from .heisenberg import HPoint
from .jets import DEFAULT_MAX_POINTS, HorizontalJetTriple
from .modulus import ModulusOfContinuity
from .polynomials import (Polynomial, _two_prod, _two_sum, integral_abs_many, newton_interpolant,
                          real_roots, taylor_local)

DEFAULT_SUBSET_BUDGET = 20000
ZERO_CONSTANT = 1e-12
# |A| is reduced by this many ulps of the magnitudes that cancel in it, so
# exactly horizontal data scans to 0 instead of to rounding noise.
NOISE_ULPS = 256.0
_EPS = np.finfo(float).eps


@dataclass
class AVScanReport:
    max_ratio: float
    witness: tuple
    ratios_by_scale: list
    mode: str
    subsets_scanned: int = 0
    exhaustive: bool = True
    note: str = ""

    def to_json(self) -> dict:
        w = self.witness
        if w is not None and self.mode == "discrete":
            w = [list(w[0]), w[1], w[2]]
        return {
            "mode": self.mode,
            "max_ratio": self.max_ratio,
            "witness": None if w is None else list(w),
            "ratios_by_scale": [list(p) for p in self.ratios_by_scale],
            "subsets_scanned": self.subsets_scanned,
            "exhaustive": self.exhaustive,
            "note": self.note,
        }


# ---------------------------------------------------------------- continuous

def _anchor_polys(gamma: HorizontalJetTriple, i: int):
    return taylor_local(gamma.F.data[:, i]), taylor_local(gamma.G.data[:, i])


def _continuous_from_anchor(gamma, omega, i, js):
    """A and V from anchor index ``i`` to every index in ``js`` (all > i)."""
    x = gamma.K.points
    F, G, H = gamma.F.data, gamma.G.data, gamma.H.data
    m = gamma.m
    d = x[js] - x[i]
    TF, TG = _anchor_polys(gamma, i)
    dTF, dTG = TF.deriv(), TG.deriv()
    poly = dTF * TG - dTG * TF
    bracket = poly.antideriv()
    TGd, TFd = TG(d), TF(d)
    A = (H[0, js] - H[0, i] - 2.0 * bracket(d)
         + 2.0 * F[0, i] * (G[0, js] - TGd)
         - 2.0 * G[0, i] * (F[0, js] - TFd))
    size = (np.abs(H[0, js]) + abs(H[0, i]) + 2.0 * _abs_poly(poly)(d)
            + 2.0 * abs(F[0, i]) * (np.abs(G[0, js]) + np.abs(TGd))
            + 2.0 * abs(G[0, i]) * (np.abs(F[0, js]) + np.abs(TFd)))
    w = omega(d)
    speed = integral_abs_many(dTF, 0.0, d) + integral_abs_many(dTG, 0.0, d)
    V = w ** 2 * d ** (2 * m) + w * d ** m * speed
    return _denoise(A, size), V


def _abs_poly(P):
    """Antiderivative of the polynomial with coefficients ``|c_k|``."""
    return Polynomial(np.abs(P.coeffs)).antideriv()


def _denoise(A, size):
    A = np.asarray(A, dtype=float)
    mag = np.maximum(np.abs(A) - NOISE_ULPS * _EPS * size, 0.0)
    return np.copysign(mag, A)


def area_discrepancy(gamma: HorizontalJetTriple, a: float, b: float) -> float:
    ia, ib = gamma.K.index(a), gamma.K.index(b)
    if ia == ib:
        return 0.0
    F, G, H = gamma.F.data, gamma.G.data, gamma.H.data
    d = b - a
    TF, TG = _anchor_polys(gamma, ia)
    integral = (TF.deriv() * TG - TG.deriv() * TF).integrate(0.0, d)
    return float(H[0, ib] - H[0, ia] - 2.0 * integral
                 + 2.0 * F[0, ia] * (G[0, ib] - TG(d))
                 - 2.0 * G[0, ia] * (F[0, ib] - TF(d)))


def omega_velocity(gamma: HorizontalJetTriple, omega: ModulusOfContinuity,
                   a: float, b: float) -> float:
    if not a < b:
        raise DomainError("omega_velocity needs a < b")
    ia, ib = gamma.K.index(a), gamma.K.index(b)
    _, V = _continuous_from_anchor(gamma, omega, ia, np.array([ib]))
    return float(V[0])


def _bin_max(gaps, ratios, diam):
    out = {}
    if diam <= 0:
        return []
    bins = np.floor(np.log2(np.asarray(gaps) / diam)).astype(int)
    for b, r in zip(bins.tolist(), np.asarray(ratios).tolist()):
        out[b] = max(out.get(b, 0.0), r)
    return [(diam * 2.0 ** b, out[b]) for b in sorted(out, reverse=True)]


def av_ratio_scan(gamma: HorizontalJetTriple, omega: ModulusOfContinuity,
                  max_points: int | None = DEFAULT_MAX_POINTS) -> AVScanReport:
    """Max of ``|A(a, b)| / V(a, b)`` over ``a < b`` in ``K``."""
    x = gamma.K.points
    n = x.size
    if max_points is not None and n > max_points:
        raise DomainError(f"|K| = {n} exceeds the pair-scan cap {max_points}")
    best, witness = -1.0, None
    gaps, ratios = [], []
    for i in range(n - 1):
        js = np.arange(i + 1, n)
        A, V = _continuous_from_anchor(gamma, omega, i, js)
        r = np.abs(A) / V
        k = int(np.argmax(r))
        if r[k] > best:
            best, witness = float(r[k]), (float(x[i]), float(x[js[k]]))
        gaps.append(x[js] - x[i])
        ratios.append(r)
    by_scale = _bin_max(np.concatenate(gaps), np.concatenate(ratios), gamma.K.diam)
    return AVScanReport(max(best, 0.0), witness, by_scale, "continuous",
                        subsets_scanned=n * (n - 1) // 2, exhaustive=True)


# ------------------------------------------------------------------ discrete

def _values3(values, size):
    v = np.asarray(values, dtype=float)
    if v.shape == (3, size) and size != 3:
        v = v.T
    if v.shape != (size, 3):
        raise InconsistentDataError(f"expected {size} (f, g, h) triples")
    return v


class _SubsetAV:
    """All pairwise discrete A and V on one node set ``X``."""

    def __init__(self, X, vals, omega):
        X = np.asarray(X, dtype=float)
        if len(set(X.tolist())) != X.size:
            raise InconsistentDataError("discrete sets need distinct points")
        order = np.argsort(X)
        self.X = X[order]
        vals = vals[order]
        self.m = self.X.size - 1
        u = self.X - self.X[0]
        self.u = u
        Pf = newton_interpolant(u, vals[:, 0])
        Pg = newton_interpolant(u, vals[:, 1])
        self.h = vals[:, 2]
        poly = Pf.deriv() * Pg - Pg.deriv() * Pf
        self.bracket = poly.antideriv()(u)
        self.bracket_size = _abs_poly(poly)(u)
        self.speed = (integral_abs_many(Pf.deriv(), 0.0, u)
                      + integral_abs_many(Pg.deriv(), 0.0, u))
        diam = u[-1]
        w = omega(diam) if diam > 0 else 0.0
        self.scale2 = w ** 2 * diam ** (2 * self.m)
        self.scale1 = w * diam ** self.m

    def pair(self, i, j):
        A = self.h[j] - self.h[i] - 2.0 * (self.bracket[j] - self.bracket[i])
        size = abs(self.h[j]) + abs(self.h[i]) + 2.0 * (self.bracket_size[j] + self.bracket_size[i])
        A = float(_denoise(A, size))
        V = self.scale2 + self.scale1 * abs(self.speed[j] - self.speed[i])
        return A, V


def _horner_rows(C, t):
    """Compensated Horner with one coefficient row per leading index of ``t``.

    ``C`` has shape ``(s, d + 1)``; ``t`` has shape ``(s, ...)``.
    """
    C = C.reshape(C.shape + (1,) * (t.ndim - 1))
    acc = np.broadcast_to(C[:, -1], t.shape).copy()
    err = np.zeros(t.shape)
    for k in range(C.shape[1] - 2, -1, -1):
        p, pi = _two_prod(acc, t)
        acc, sigma = _two_sum(p, C[:, k])
        err = err * t + (pi + sigma)
    return acc + err


def _conv_rows(a, b):
    out = np.zeros((a.shape[0], a.shape[1] + b.shape[1] - 1))
    for i in range(a.shape[1]):
        out[:, i: i + b.shape[1]] += a[:, i: i + 1] * b
    return out


def _newton_rows(u, y):
    """Monomial coefficients (in ``u``) of the interpolants, one row per subset."""
    n = u.shape[1]
    table = y.copy()
    dd = [table[:, 0]]
    for j in range(1, n):
        table = (table[:, 1:] - table[:, :-1]) / (u[:, j:] - u[:, : n - j])
        dd.append(table[:, 0])
    c = dd[-1][:, None]
    for j in range(n - 2, -1, -1):
        nxt = np.zeros((c.shape[0], c.shape[1] + 1))
        nxt[:, 1:] = c
        nxt[:, :-1] -= u[:, j: j + 1] * c
        nxt[:, 0] += dd[j]
        c = nxt
    return c


def _deriv_rows(C):
    if C.shape[1] == 1:
        return np.zeros_like(C)
    return C[:, 1:] * np.arange(1, C.shape[1])


def _antideriv_rows(C):
    return np.concatenate([np.zeros((C.shape[0], 1)), C / np.arange(1, C.shape[1] + 1)], axis=1)


def _critical_rows(D, top):
    """Real roots of each row of ``D`` in ``(0, top)``, padded with 0."""
    s, k = D.shape
    deg = k - 1
    out = np.zeros((s, max(deg, 0)))
    if deg <= 0:
        return out
    lead = D[:, -1]
    fast = (lead != 0.0) & np.all(np.isfinite(D), axis=1)
    if np.any(fast):
        comp = np.zeros((int(fast.sum()), deg, deg))
        comp[:, 0, :] = -D[fast, -2::-1] / lead[fast, None]
        if deg > 1:
            comp[:, np.arange(1, deg), np.arange(deg - 1)] = 1.0
        r = np.linalg.eigvals(comp)
        ok = (np.abs(r.imag) <= 1e-12 * (1.0 + np.abs(r.real))) & np.isfinite(r.real)
        real = np.where(ok, r.real, 0.0)
        inside = (real > 0) & (real < top[fast, None])
        out[fast] = np.where(inside, real, 0.0)
    for i in np.flatnonzero(~fast):
        roots = real_roots(Polynomial(D[i]), 0.0, float(top[i])) if top[i] > 0 else []
        out[i, : len(roots)] = roots
    return out


def _abs_integral_rows(P, u):
    """``int_0^{u_j} |P'|`` for every node, with ``P`` given by rows."""
    crit = _critical_rows(_deriv_rows(P), u[:, -1])
    ends = u[:, :, None]
    knots = np.concatenate([np.zeros(ends.shape), np.minimum(crit[:, None, :], ends), ends], axis=2)
    knots.sort(axis=2)
    vals = _horner_rows(P, knots)
    return np.sum(np.abs(np.diff(vals, axis=2)), axis=2)


def subset_av_rows(x, vals, subsets, omega: ModulusOfContinuity):
    """Discrete A and V for every pair of every subset, vectorized over subsets.

    Returns ``(X, A, V)`` with ``X`` the sorted subset nodes ``(s, n)`` and
    ``A``, ``V`` of shape ``(s, n (n - 1) / 2)`` in ``itertools.combinations``
    order of the sorted nodes.
    """
    idx = np.asarray(subsets, dtype=int)
    X = x[idx]
    order = np.argsort(X, axis=1, kind="stable")
    X = np.take_along_axis(X, order, axis=1)
    V3 = vals[np.take_along_axis(idx, order, axis=1)]
    if np.any(np.diff(X, axis=1) == 0):
        raise InconsistentDataError("discrete sets need distinct points")
    n = X.shape[1]
    u = X - X[:, :1]
    Pf, Pg = _newton_rows(u, V3[:, :, 0]), _newton_rows(u, V3[:, :, 1])
    poly = _conv_rows(_deriv_rows(Pf), Pg) - _conv_rows(_deriv_rows(Pg), Pf)
    bracket = _horner_rows(_antideriv_rows(poly), u)
    bracket_size = _horner_rows(_antideriv_rows(np.abs(poly)), u)
    speed = _abs_integral_rows(Pf, u) + _abs_integral_rows(Pg, u)
    diam = u[:, -1]
    w = np.where(diam > 0, omega(np.where(diam > 0, diam, 1.0)), 0.0)
    m = n - 1
    scale2, scale1 = w ** 2 * diam ** (2 * m), w * diam ** m
    h = V3[:, :, 2]
    I, J = (np.array(t, dtype=int) for t in zip(*itertools.combinations(range(n), 2)))
    A = h[:, J] - h[:, I] - 2.0 * (bracket[:, J] - bracket[:, I])
    size = np.abs(h[:, J]) + np.abs(h[:, I]) + 2.0 * (bracket_size[:, J] + bracket_size[:, I])
    V = scale2[:, None] + scale1[:, None] * np.abs(speed[:, J] - speed[:, I])
    return X, _denoise(A, size), V


def _locate(X, t):
    idx = np.flatnonzero(np.asarray(X, dtype=float) == t)
    if idx.size == 0:
        raise DomainError(f"point {t} is not in X")
    return int(idx[0])


def discrete_area(X, values, a: float, b: float, m: int | None = None) -> float:
    """``h(b) - h(a) - 2 int_a^b (P_f' P_g - P_g' P_f)`` on node set ``X``.

    ``values`` holds the ``(f, g, h)`` samples on ``X`` in the same order.
    """
    X = np.asarray(getattr(X, "points", X), dtype=float)
    if m is not None and X.size != m + 1:
        raise DomainError(f"|X| must be m + 1 = {m + 1}, got {X.size}")
    S = _SubsetAV(X, _values3(values, X.size), ModulusOfContinuity.linear())
    i, j = _locate(S.X, a), _locate(S.X, b)
    return float(S.pair(i, j)[0])


def discrete_velocity(X, values, omega: ModulusOfContinuity, a: float, b: float,
                      m: int | None = None) -> float:
    X = np.asarray(getattr(X, "points", X), dtype=float)
    if m is not None and X.size != m + 1:
        raise DomainError(f"|X| must be m + 1 = {m + 1}, got {X.size}")
    if not a < b:
        raise DomainError("discrete_velocity needs a < b")
    S = _SubsetAV(X, _values3(values, X.size), omega)
    i, j = _locate(S.X, a), _locate(S.X, b)
    return float(S.pair(i, j)[1])


def subset_family(n: int, size: int, budget: int, x=None):
    """Index subsets of ``range(n)`` of the given size to scan.

    Exhaustive when ``C(n, size) <= budget``. Otherwise every pair ``(i, j)``
    is completed by its ``size - 2`` nearest other points (distance to the
    nearer endpoint, ties to the lower index); pairs are taken in order of
    increasing gap and the list is cut at ``budget``, so larger budgets scan
    supersets. Returns ``(subsets, exhaustive)``.
    """
    if budget <= 0:
        raise DomainError("subset budget must be positive")
    if size > n:
        raise DomainError(f"need at least {size} points, have {n}")
    if math.comb(n, size) <= budget:
        return [tuple(c) for c in itertools.combinations(range(n), size)], True
    x = np.arange(n, dtype=float) if x is None else np.asarray(x, dtype=float)
    order = np.argsort(x, kind="stable")
    xs = x[order]
    if np.any(np.diff(xs) <= 0):
        raise DomainError("subset points must be distinct")
    k = size - 2
    seen, out = set(), []
    for i, j in _pairs_by_gap(xs, order):
        # with sorted points the k nearest lie within k + 1 steps of i or j
        cand = np.unique(np.concatenate([np.arange(i - k - 1, i + k + 2),
                                         np.arange(j - k - 1, j + k + 2)]))
        cand = cand[(cand >= 0) & (cand < n) & (cand != i) & (cand != j)]
        dist = np.minimum(np.abs(xs[cand] - xs[i]), np.abs(xs[cand] - xs[j]))
        extra = cand[np.lexsort((order[cand], dist))][:k]
        X = tuple(sorted(order[[i, j, *extra.tolist()]].tolist()))
        if X not in seen:
            seen.add(X)
            out.append(X)
            if len(out) >= budget:
                break
    return out, False


def _pairs_by_gap(xs, order):
    """Sorted-index pairs in order of increasing gap, then original index pair."""
    n = xs.size

    def entry(i, j):
        a, b = sorted((int(order[i]), int(order[j])))
        return (xs[j] - xs[i], a, b, i, j)

    heap = [entry(i, i + 1) for i in range(n - 1)]
    heapq.heapify(heap)
    while heap:
        *_, i, j = heapq.heappop(heap)
        yield i, j
        if j + 1 < n:
            heapq.heappush(heap, entry(i, j + 1))


def discrete_av_scan(K, values, m: int, omega: ModulusOfContinuity,
                     subset_budget: int = DEFAULT_SUBSET_BUDGET) -> AVScanReport:
    """Max of ``|A[X; a, b]| / V[X; a, b]`` over scanned ``X`` and ``a < b`` in ``X``.

    The witness is ``(X, a, b)``.
    """
    x = np.asarray(getattr(K, "points", K), dtype=float)
    vals = _values3(values, x.size)
    subsets, exhaustive = subset_family(x.size, m + 1, subset_budget, x)
    if m == 0:
        return AVScanReport(0.0, None, [], "discrete", subsets_scanned=len(subsets),
                            exhaustive=exhaustive)
    X, A, V = subset_av_rows(x, vals, subsets, omega)
    I, J = zip(*itertools.combinations(range(m + 1), 2))
    gaps = (X[:, list(J)] - X[:, list(I)]).ravel()
    ratios = (np.abs(A) / V).ravel()
    k = int(np.argmax(ratios))
    best = float(ratios[k])
    s_k, p_k = divmod(k, len(I))
    witness = (tuple(X[s_k].tolist()), float(X[s_k, I[p_k]]), float(X[s_k, J[p_k]]))
    diam = float(x.max() - x.min())
    return AVScanReport(max(best, 0.0), witness, _bin_max(gaps, ratios, diam), "discrete",
                        subsets_scanned=len(subsets), exhaustive=exhaustive)


# ---------------------------------------------------------- left invariance

def _all_continuous(gamma, omega):
    n = len(gamma.K)
    As, Vs = [], []
    for i in range(n - 1):
        A, V = _continuous_from_anchor(gamma, omega, i, np.arange(i + 1, n))
        As.append(A)
        Vs.append(V)
    return np.concatenate(As), np.concatenate(Vs)


def _all_discrete(x, vals, m, omega, budget):
    subsets, _ = subset_family(x.size, m + 1, budget, x)
    _, A, V = subset_av_rows(x, vals, subsets, omega)
    return np.stack([A.ravel(), V.ravel()], axis=1)


def left_invariance_audit(gamma, p: HPoint, mode: str = "continuous",
                          omega: ModulusOfContinuity | None = None,
                          subset_budget: int = DEFAULT_SUBSET_BUDGET) -> float:
    """Max change of A and V over all pairs after left-translating by ``p``.

    ``gamma`` is a :class:`HorizontalJetTriple`; in discrete mode the point
    values ``F^0, G^0, H^0`` are used with ``m`` taken from the jet.
    """
    omega = omega or ModulusOfContinuity.linear()
    moved = gamma.translated(p)
    if mode == "continuous":
        A0, V0 = _all_continuous(gamma, omega)
        A1, V1 = _all_continuous(moved, omega)
        return float(max(np.max(np.abs(A1 - A0)), np.max(np.abs(V1 - V0))))
    if mode == "discrete":
        x = gamma.K.points
        base = np.column_stack([gamma.F.data[0], gamma.G.data[0], gamma.H.data[0]])
        shifted = np.column_stack([moved.F.data[0], moved.G.data[0], moved.H.data[0]])
        D0 = _all_discrete(x, base, gamma.m, omega, subset_budget)
        D1 = _all_discrete(x, shifted, gamma.m, omega, subset_budget)
        return float(np.max(np.abs(D1 - D0)))
    raise DomainError(f"unknown mode {mode!r}")


def ratio_of_constants(c_cont: float, c_disc: float, zero: float = ZERO_CONSTANT) -> float:
    """``max(c/d, d/c)`` with both-negligible treated as 1."""
    if max(c_cont, c_disc) <= zero:
        return 1.0
    if min(c_cont, c_disc) <= 0.0:
        return math.inf
    return max(c_cont / c_disc, c_disc / c_cont)
