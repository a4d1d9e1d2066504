"""Flat smooth step, compact bumps and adaptive quadrature.

Derivatives of the step ``chi`` and the bump ``exp(-1/(1-u^2))`` are exact
up to rounding: they come from truncated power-series (Taylor-mode)
arithmetic, so no symbolic expressions or finite differences are involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError

# Below this argument exp(-1/s) and every derivative of it underflow to
# values far below double precision relative to O(1) quantities.
FLAT_CUTOFF = 1.0 / 700.0


# ------------------------------------------------------------ series algebra
# A series is an array of shape (order + 1, n): row k is the k-th Taylor
# coefficient (derivative / k!) at each of n base points.

def series_mul(a, b):
    out = np.zeros_like(a)
    for k in range(a.shape[0]):
        out[k] = np.sum(a[: k + 1] * b[k::-1], axis=0)
    return out


def series_recip(a):
    out = np.zeros_like(a)
    out[0] = 1.0 / a[0]
    for k in range(1, a.shape[0]):
        out[k] = -out[0] * np.sum(a[1: k + 1] * out[k - 1::-1], axis=0)
    return out


def series_exp(a):
    out = np.zeros_like(a)
    out[0] = np.exp(a[0])
    for k in range(1, a.shape[0]):
        j = np.arange(1, k + 1)[:, None]
        out[k] = np.sum(j * a[1: k + 1] * out[k - 1::-1], axis=0) / k
    return out


def _to_derivs(series):
    fact = np.array([math.factorial(k) for k in range(series.shape[0])], dtype=float)
    return series * fact[:, None]


def _inv_linear(q0, sign, order):
    """Series of ``1 / (q0 + sign * t)`` in ``t``."""
    k = np.arange(order + 1)[:, None]
    return (-sign) ** k / q0[None, :] ** (k + 1)


# ---------------------------------------------------------------- smooth step

def _chi_lower(s, order):
    """Derivatives of chi at points ``0 < s <= 1/2``.

    ``chi = w / (1 + w)`` with ``w = exp(-(1/s - 1/(1-s)))`` which stays
    below 1 on this half, so nothing overflows.
    """
    E = _inv_linear(s, 1.0, order) - _inv_linear(1.0 - s, -1.0, order)
    w = series_exp(-E)
    one_plus = w.copy()
    one_plus[0] += 1.0
    return _to_derivs(series_mul(w, series_recip(one_plus)))


def smoothstep_derivs(s, order: int = 0) -> np.ndarray:
    """``d^k chi / ds^k`` for ``k = 0..order``; shape ``(order + 1, n)``.

    ``chi(s) = sigma(s) / (sigma(s) + sigma(1 - s))`` with
    ``sigma(s) = exp(-1/s)`` for ``s > 0`` and 0 otherwise.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.zeros((order + 1, s.size))
    out[0] = (s >= 1.0).astype(float)
    low = (s > FLAT_CUTOFF) & (s <= 0.5)
    high = (s > 0.5) & (s < 1.0 - FLAT_CUTOFF)
    if np.any(low):
        out[:, low] = _chi_lower(s[low], order)
    if np.any(high):
        mirror = _chi_lower(1.0 - s[high], order)
        signs = (-1.0) ** np.arange(order + 1)
        out[:, high] = -signs[:, None] * mirror
        out[0, high] += 1.0
    out[0, (s >= 1.0 - FLAT_CUTOFF) & (s < 1.0)] = 1.0
    return out


def smoothstep(s):
    v = smoothstep_derivs(s, 0)[0]
    return float(v[0]) if np.ndim(s) == 0 else v


# ---------------------------------------------------------------------- bump

def bump_derivs(u, order: int = 0) -> np.ndarray:
    """``d^k/du^k exp(-1/(1-u^2))`` on ``|u| < 1`` (zero elsewhere)."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.zeros((order + 1, u.size))
    q0 = 1.0 - u * u
    inside = q0 > FLAT_CUTOFF
    if np.any(inside):
        ui = u[inside]
        q = np.zeros((order + 1, ui.size))
        q[0] = q0[inside]
        if order >= 1:
            q[1] = -2.0 * ui
        if order >= 2:
            q[2] = -1.0
        out[:, inside] = _to_derivs(series_exp(-series_recip(q)))
    return out


@lru_cache(maxsize=None)
def bump_derivative_maxima(order: int) -> tuple:
    """``max |d^i/du^i exp(-1/(1-u^2))|`` over ``u`` for ``i = 0..order``."""
    from scipy.optimize import minimize_scalar

    u = np.linspace(-1.0, 1.0, 40001)
    D = np.abs(bump_derivs(u, order))
    out = []
    h = u[1] - u[0]
    for i in range(order + 1):
        j = int(np.argmax(D[i]))
        res = minimize_scalar(lambda t: -abs(bump_derivs(t, i)[i, 0]),
                              bounds=(u[j] - h, u[j] + h), method="bounded",
                              options={"xatol": 1e-14})
        out.append(max(float(D[i, j]), -float(res.fun)))
    return tuple(out)


@dataclass(frozen=True)
class Bump:
    """``amplitude * exp(-1/(1-u^2))`` with ``u`` mapping ``[lo, hi]`` onto ``[-1, 1]``."""

    lo: float
    hi: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError("bump support must have lo < hi")

    def derivs(self, t, order: int = 0) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        r = 2.0 / (self.hi - self.lo)
        u = (2.0 * t - self.lo - self.hi) / (self.hi - self.lo)
        D = bump_derivs(u, order)
        scale = self.amplitude * r ** np.arange(order + 1)
        return D * scale[:, None]

    def __call__(self, t):
        v = self.derivs(t, 0)[0]
        return float(v[0]) if np.ndim(t) == 0 else v

    def sup_norms(self, order: int) -> np.ndarray:
        """Exact sup norms of derivatives 0..order (from the cached maxima)."""
        r = 2.0 / (self.hi - self.lo)
        B = np.array(bump_derivative_maxima(order))
        return abs(self.amplitude) * B * r ** np.arange(order + 1)

    def to_json(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "amplitude": self.amplitude}


# ---------------------------------------------------------------- quadrature

_GL = {n: np.polynomial.legendre.leggauss(n) for n in (10, 20)}


def _panel_rules(fun, lo, hi):
    """GL10 and GL20 estimates on each panel ``[lo[i], hi[i]]`` (one call to ``fun``)."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x10, w10 = _GL[10]
    x20, w20 = _GL[20]
    nodes = np.concatenate([x10, x20])
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    vals = np.asarray(fun(pts.ravel()), dtype=float).reshape(pts.shape)
    return half * (vals[:, :10] @ w10), half * (vals[:, 10:] @ w20)


def adaptive_panels(fun, a: float, b: float, tol: float = 1e-11, breakpoints=(),
                    max_panels: int = 20000):
    """Adaptive composite Gauss-Legendre quadrature.

    Panels are bisected until GL10 and GL20 agree to
    ``tol * (1 + |total|) * width / (b - a)``. Returns the sorted panel edges
    and per-panel integrals (GL20 values). ``fun`` must be vectorized.
    """
    if not a < b:
        raise DomainError("quadrature needs a < b")
    edges = np.unique(np.clip(np.concatenate([[a, b], np.asarray(breakpoints, float)]), a, b))
    lo, hi = edges[:-1], edges[1:]
    done_lo, done_hi, done_val = [], [], []
    scale = None
    while lo.size:
        g10, g20 = _panel_rules(fun, lo, hi)
        if scale is None:
            scale = 1.0 + abs(float(np.sum(g20)))
        ok = np.abs(g20 - g10) <= tol * scale * (hi - lo) / (b - a)
        ok |= (hi - lo) <= 1e-14 * (b - a)
        done_lo.append(lo[ok])
        done_hi.append(hi[ok])
        done_val.append(g20[ok])
        lo, hi = lo[~ok], hi[~ok]
        if lo.size:
            mid = 0.5 * (lo + hi)
            lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
            if sum(x.size for x in done_lo) + lo.size > max_panels:
                raise DomainError("adaptive quadrature exceeded its panel budget")
    lo = np.concatenate(done_lo)
    order = np.argsort(lo)
    hi = np.concatenate(done_hi)[order]
    val = np.concatenate(done_val)[order]
    return np.concatenate([lo[order], hi[-1:]]), val


def integrate(fun, a: float, b: float, tol: float = 1e-11, breakpoints=()) -> float:
    if a == b:
        return 0.0
    if a > b:
        return -integrate(fun, b, a, tol, breakpoints)
    _, vals = adaptive_panels(fun, a, b, tol, breakpoints)
    return float(np.sum(vals))


def gl_on(fun, lo, hi, n: int = 20):
    """Single-panel GL rule on each ``[lo[i], hi[i]]`` (vectorized)."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    x, w = _GL[n]
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    pts = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(fun(pts.ravel()), dtype=float).reshape(pts.shape)
    return half * (vals @ w)
