"""Univariate polynomials in the monomial basis.

Besides the usual arithmetic this module provides divided differences,
Newton interpolation, Taylor polynomials built from jets, and integrals of
``|P|`` computed by isolating the real roots of ``P`` (recursively, via the
roots of ``P'``) and integrating an exact antiderivative on each
sign-constant piece.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InconsistentDataError

_SPLITTER = 134217729.0  # 2**27 + 1, Dekker split for double precision
_ROOT_WIDTH = 1e-13


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, al * bl - (((p - ah * bh) - al * bh) - ah * bl)


class Polynomial:
    """Immutable polynomial ``sum(c[k] * x**k)``.

    Trailing zero coefficients are trimmed; the zero polynomial is ``[0.0]``.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=float).ravel()
        if c.size == 0:
            c = np.zeros(1)
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else np.zeros(1)
        if not np.all(np.isfinite(c)):
            raise DomainError("polynomial coefficients must be finite")
        c.flags.writeable = False
        self._c = c

    @classmethod
    def _trusted(cls, c) -> "Polynomial":
        """Wrap a fresh float array produced by arithmetic; skips validation."""
        k = len(c)
        while k > 1 and c[k - 1] == 0.0:
            k -= 1
        c = c[:k]
        c.flags.writeable = False
        obj = cls.__new__(cls)
        obj._c = c
        return obj

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        return len(self._c) - 1

    def is_zero(self) -> bool:
        return self.degree == 0 and self._c[0] == 0.0

    def __repr__(self):
        return f"Polynomial({self._c.tolist()})"

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return np.array_equal(self._c, other._c)

    __hash__ = None

    def __call__(self, x):
        """Compensated Horner evaluation (scalar or array argument)."""
        c = self._c
        xs = np.asarray(x, dtype=float)
        s = np.full(xs.shape, c[-1])
        err = np.zeros(xs.shape)
        for ck in c[-2::-1]:
            p, pi = _two_prod(s, xs)
            s, sigma = _two_sum(p, ck)
            err = err * xs + (pi + sigma)
        out = s + err
        if np.ndim(x) == 0:
            return float(out)
        return out

    def eval_plain(self, x: float) -> float:
        """Plain Horner on a Python float; used inside bisection loops."""
        acc = 0.0
        for ck in reversed(self._c.tolist()):
            acc = acc * x + ck
        return acc

    def __add__(self, other):
        other = _coerce(other)
        n = max(len(self._c), len(other._c))
        out = np.zeros(n)
        out[: len(self._c)] += self._c
        out[: len(other._c)] += other._c
        return Polynomial._trusted(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._trusted(-self._c)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        if np.isscalar(other):
            return Polynomial._trusted(self._c * float(other))
        other = _coerce(other)
        return Polynomial._trusted(np.convolve(self._c, other._c))

    __rmul__ = __mul__

    def deriv(self, k: int = 1) -> "Polynomial":
        c = self._c
        for _ in range(k):
            if len(c) == 1:
                return Polynomial([0.0])
            c = c[1:] * np.arange(1, len(c))
        return Polynomial._trusted(np.array(c))

    def antideriv(self, constant: float = 0.0) -> "Polynomial":
        c = np.concatenate([[float(constant)], self._c / np.arange(1, len(self._c) + 1)])
        return Polynomial._trusted(c)

    def integrate(self, a: float, b: float) -> float:
        F = self.antideriv()
        return F(b) - F(a)

    def shift(self, a: float) -> "Polynomial":
        """Return ``Q`` with ``Q(u) = P(u + a)``."""
        out = Polynomial([self._c[-1]])
        lin = Polynomial([a, 1.0])
        for ck in self._c[-2::-1]:
            out = out * lin + ck
        return out

    def to_list(self) -> list:
        return self._c.tolist()


def _coerce(p) -> Polynomial:
    if isinstance(p, Polynomial):
        return p
    return Polynomial([float(p)])


@dataclass(frozen=True)
class NodeSet:
    """Strictly increasing interpolation nodes."""

    points: tuple

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        if not pts:
            raise DomainError("NodeSet needs at least one point")
        arr = np.asarray(pts)
        if not np.all(np.isfinite(arr)):
            raise DomainError("NodeSet points must be finite")
        if np.any(np.diff(arr) <= 0):
            raise DomainError("NodeSet points must be strictly increasing")
        if len(pts) >= 2:
            diam = arr[-1] - arr[0]
            if np.min(np.diff(arr)) < 1e-12 * diam:
                raise DomainError("NodeSet spacing below 1e-12 * diam")
        object.__setattr__(self, "points", pts)

    @classmethod
    def of(cls, points) -> "NodeSet":
        return cls(tuple(np.sort(np.asarray(points, dtype=float))))

    @property
    def diam(self) -> float:
        return self.points[-1] - self.points[0]

    def __len__(self):
        return len(self.points)

    def array(self) -> np.ndarray:
        return np.asarray(self.points)


def _as_points(X):
    return np.asarray(X.points if isinstance(X, NodeSet) else X, dtype=float)


def divided_differences(X, values) -> list:
    """Newton coefficients ``[f[x0], f[x0,x1], ..., f[x0..xk]]``.

    ``X`` may be a :class:`NodeSet` or any sequence of distinct points
    (order is respected, so permutations are allowed).
    """
    x = _as_points(X)
    table = np.array(values, dtype=float).ravel()
    if table.size != x.size:
        raise DomainError(f"{x.size} nodes but {table.size} values")
    if len(set(x.tolist())) != x.size:
        raise InconsistentDataError("divided differences need distinct nodes")
    out = [table[0]]
    for j in range(1, x.size):
        table = (table[1:] - table[:-1]) / (x[j:] - x[: x.size - j])
        out.append(table[0])
    return [float(v) for v in out]


def newton_interpolant(X, values) -> Polynomial:
    """Interpolating polynomial of degree ``<= len(X) - 1`` in monomial form."""
    x = _as_points(X)
    dd = divided_differences(x, values)
    # Horner in the Newton basis: c <- c * (t - x_j) + dd_j
    c = np.array([dd[-1]])
    for j in range(len(dd) - 2, -1, -1):
        nxt = np.zeros(c.size + 1)
        nxt[1:] = c
        nxt[:-1] -= x[j] * c
        nxt[0] += dd[j]
        c = nxt
    return Polynomial(c)


def taylor_from_jet(jet_values_at_a, a: float = 0.0) -> Polynomial:
    """``sum F^k(a)/k! (x - a)^k`` expanded in the monomial basis."""
    local = taylor_local(jet_values_at_a)
    return local.shift(-float(a)) if a != 0 else local


def taylor_local(jet_values_at_a) -> Polynomial:
    """Taylor polynomial in the local variable ``u = x - a``."""
    vals = np.asarray(jet_values_at_a, dtype=float).ravel()
    fact = np.array([math.factorial(k) for k in range(vals.size)], dtype=float)
    return Polynomial(vals / fact)


def real_roots(P: Polynomial, a: float, b: float) -> list:
    """Sorted real roots of ``P`` in the open interval ``(a, b)``.

    Extrema of ``P`` lie at roots of ``P'``, so between consecutive
    critical points ``P`` is monotone and has at most one root, located by
    bisection down to width ``1e-13 * (b - a)``. The zero polynomial has no
    isolated roots and returns ``[]``.
    """
    if not a < b:
        raise DomainError("real_roots needs a < b")
    return _roots(P, a, b, _ROOT_WIDTH * (b - a))


def _roots(P, a, b, width):
    n = P.degree
    if n <= 0:
        return []
    c = P.coeffs
    if n == 1:
        with np.errstate(over="ignore"):
            r = -c[0] / c[1]
        return [float(r)] if a < r < b else []
    crit = _roots(P.deriv(), a, b, width)
    knots = [a] + crit + [b]
    vals = [P.eval_plain(t) for t in knots]
    out = []
    for i in range(len(knots) - 1):
        lo, hi = knots[i], knots[i + 1]
        flo, fhi = vals[i], vals[i + 1]
        if flo == 0.0:
            if i > 0 and (not out or out[-1] != lo):
                out.append(lo)
            continue
        if fhi == 0.0 or (flo > 0) == (fhi > 0):
            continue
        while hi - lo > width:
            mid = 0.5 * (lo + hi)
            fm = P.eval_plain(mid)
            if fm == 0.0:
                lo = hi = mid
                break
            if (fm > 0) == (flo > 0):
                lo = mid
            else:
                hi = mid
        out.append(0.5 * (lo + hi))
    # roots sitting exactly on interior critical points (even multiplicity)
    for t, v in zip(knots[1:-1], vals[1:-1]):
        if v == 0.0 and t not in out:
            out.append(t)
    return sorted(out)


def integral_abs(P: Polynomial, a: float, b: float, tol: float = 1e-12) -> float:
    """``int_a^b |P|`` split at the real roots of ``P`` in ``(a, b)``.

    ``tol`` bounds the absolute error relative to ``1 + result``; the root
    bisection width keeps the actual error far below any sensible value.
    """
    if not a < b:
        raise DomainError("integral_abs needs a < b")
    if tol <= 0:
        raise DomainError("tol must be positive")
    if P.is_zero():
        return 0.0
    F = P.antideriv()
    knots = [a] + real_roots(P, a, b) + [b]
    vals = F(np.asarray(knots))
    return float(np.sum(np.abs(np.diff(vals))))


def integral_abs_many(P: Polynomial, a: float, ends) -> np.ndarray:
    """``int_a^e |P|`` for every ``e`` in ``ends`` (all ``e >= a``).

    Roots are isolated once on ``(a, max(ends))``; each end then costs one
    antiderivative evaluation.
    """
    ends = np.asarray(ends, dtype=float)
    if ends.size == 0:
        return np.zeros(0)
    if np.any(ends < a):
        raise DomainError("integral_abs_many needs ends >= a")
    if P.is_zero():
        return np.zeros(ends.shape)
    top = float(ends.max())
    if top == a:
        return np.zeros(ends.shape)
    F = P.antideriv()
    knots = np.array([a] + real_roots(P, a, top) + [top])
    Fk = F(knots)
    cum = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(Fk)))])
    idx = np.clip(np.searchsorted(knots, ends, side="right") - 1, 0, len(knots) - 1)
    return cum[idx] + np.abs(F(ends) - Fk[idx])


def max_abs(P: Polynomial, a: float, b: float) -> float:
    """``max_{[a,b]} |P|`` by enumerating endpoints and critical points."""
    if not a < b:
        raise DomainError("max_abs needs a < b")
    cand = [a, b] + real_roots(P.deriv(), a, b) if P.degree >= 2 else [a, b]
    return float(np.max(np.abs(P(np.asarray(cand)))))


def markov_derivative_bound(P: Polynomial, a: float, b: float):
    """Return ``(2 n^2 / (b - a) * max|P|, max|P|)`` on ``[a, b]``."""
    m = max_abs(P, a, b)
    n = P.degree
    return 2.0 * n * n / (b - a) * m, m
