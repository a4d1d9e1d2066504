"""Heisenberg group arithmetic, horizontality checks and the vertical jet
recursion for horizontal lifts.

Coordinates are ``(x, y, z)`` with product

    (x, y, z) * (x', y', z') = (x + x', y + y', z + z' + 2 (y x' - x y')).

A curve ``(f, g, h)`` is horizontal when ``h' = 2 (f' g - f g')``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InconsistentDataError


@dataclass(frozen=True)
class HPoint:
    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"HPoint.{name} must be finite")
            object.__setattr__(self, name, v)

    def __mul__(self, other: "HPoint") -> "HPoint":
        return group_mul(self, other)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


IDENTITY = HPoint(0.0, 0.0, 0.0)


def group_mul(p: HPoint, q: HPoint) -> HPoint:
    return HPoint(p.x + q.x, p.y + q.y, p.z + q.z + 2.0 * (p.y * q.x - p.x * q.y))


def group_inv(p: HPoint) -> HPoint:
    return HPoint(-p.x, -p.y, -p.z)


def frame_at(p: HPoint):
    """Left invariant frame ``(X, Y, Z)`` at ``p`` as 3-vectors."""
    X = np.array([1.0, 0.0, 2.0 * p.y])
    Y = np.array([0.0, 1.0, -2.0 * p.x])
    Z = np.array([0.0, 0.0, 1.0])
    return X, Y, Z


def translate_points(p: HPoint, pts) -> np.ndarray:
    """Left-translate an ``(n, 3)`` array of points by ``p``."""
    pts = np.asarray(pts, dtype=float)
    out = pts.copy()
    out[:, 0] += p.x
    out[:, 1] += p.y
    out[:, 2] += p.z + 2.0 * (p.y * pts[:, 0] - p.x * pts[:, 1])
    return out


@dataclass(frozen=True)
class SampledCurve:
    """Samples ``(f, g, h)`` of a curve on a strictly increasing grid."""

    grid: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float).ravel()
        pts = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if grid.size != pts.shape[0]:
            raise InconsistentDataError(
                f"grid has {grid.size} values but there are {pts.shape[0]} points")
        if grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise DomainError("grid must be strictly increasing with at least 2 values")
        if not (np.all(np.isfinite(grid)) and np.all(np.isfinite(pts))):
            raise DomainError("curve samples must be finite")
        grid.flags.writeable = False
        pts.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_functions(cls, f, g, h, grid) -> "SampledCurve":
        grid = np.asarray(grid, dtype=float)
        return cls(grid, np.column_stack([f(grid), g(grid), h(grid)]))

    @property
    def f(self):
        return self.points[:, 0]

    @property
    def g(self):
        return self.points[:, 1]

    @property
    def h(self):
        return self.points[:, 2]

    def translated(self, p: HPoint) -> "SampledCurve":
        return SampledCurve(self.grid, translate_points(p, self.points))

    def to_json(self) -> dict:
        return {"grid": self.grid.tolist(), "points": self.points.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "SampledCurve":
        return cls(obj["grid"], obj["points"])


def fd_weights(nodes, at: float) -> np.ndarray:
    """First-derivative weights at ``at`` from values on ``nodes``."""
    nodes = np.asarray(nodes, dtype=float) - at
    n = nodes.size
    V = np.vander(nodes, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[1] = 1.0
    return np.linalg.solve(V, rhs)


def finite_difference(grid, values) -> np.ndarray:
    """First derivative of samples on a (possibly nonuniform) grid.

    Five-point centered stencils in the interior (fourth order) and
    three-point one-sided stencils at the two ends on each side (second order).
    """
    t = np.asarray(grid, dtype=float)
    v = np.asarray(values, dtype=float)
    n = t.size
    if n < 3:
        return np.full(n, (v[-1] - v[0]) / (t[-1] - t[0]))
    out = np.empty(n)
    if n >= 5:
        idx = np.arange(2, n - 2)
        offs = np.arange(-2, 3)
        h = t[idx[:, None] + offs] - t[idx][:, None]
        scale = h[:, -1:]
        hs = h / scale
        # batched Vandermonde solve for the derivative weights
        V = np.stack([hs ** p for p in range(5)], axis=1)
        rhs = np.zeros((idx.size, 5))
        rhs[:, 1] = 1.0
        w = np.linalg.solve(V, rhs[..., None])[..., 0] / scale
        out[idx] = np.sum(w * v[idx[:, None] + offs], axis=1)
        edge = [0, 1, n - 2, n - 1]
    else:
        edge = list(range(n))
    for i in edge:
        start = min(max(i - 1, 0), n - 3)
        sl = slice(start, start + 3)
        out[i] = fd_weights(t[sl], t[i]) @ v[sl]
    return out


def horizontality_residual(curve, grid=None):
    """Residual ``h' - 2 (f' g - f g')`` on ``grid``.

    ``curve`` is either a :class:`SampledCurve` (derivatives by finite
    differences on its own grid; ``grid`` must be ``None`` or that grid) or
    an object with ``evaluate(t, k)`` returning an array of shape ``(3, n)``
    holding the k-th derivatives of ``(f, g, h)``; such curves may expose
    ``domain = (lo, hi)``.

    Returns ``(max_abs_residual, per_point)``.
    """
    if isinstance(curve, SampledCurve):
        if grid is not None and not np.array_equal(np.asarray(grid, float), curve.grid):
            raise DomainError("a sampled curve is checked on its own grid")
        f, g, h = curve.f, curve.g, curve.h
        df = finite_difference(curve.grid, f)
        dg = finite_difference(curve.grid, g)
        dh = finite_difference(curve.grid, h)
    else:
        if grid is None:
            raise DomainError("an evaluation grid is required")
        t = np.asarray(grid, dtype=float)
        lo, hi = getattr(curve, "domain", (-np.inf, np.inf))
        if t.size and (t.min() < lo or t.max() > hi):
            raise DomainError(f"grid leaves the curve domain [{lo}, {hi}]")
        f, g, _ = curve.evaluate(t, 0)
        df, dg, dh = curve.evaluate(t, 1)
    r = dh - 2.0 * (df * g - f * dg)
    return (float(np.max(np.abs(r))) if r.size else 0.0), r


def leibniz_vertical_jet(F, G, H0=None):
    """Vertical jet ``H^k`` (k >= 1) forced by horizontality.

    ``H^k = 2 sum_{i<k} C(k-1, i) (F^{k-i} G^i - G^{k-i} F^i)``.
    ``F`` and ``G`` are :class:`~heiswhitney.jets.ScalarJet` objects (or
    arrays of shape ``(m+1, n)``). Returns a ScalarJet whose row 0 holds
    ``H0`` (zeros when omitted), or an array when arrays were passed.
    """
    from .jets import ScalarJet

    as_jet = isinstance(F, ScalarJet)
    if as_jet != isinstance(G, ScalarJet):
        raise InconsistentDataError("F and G must both be jets or both arrays")
    if as_jet:
        if F.K != G.K or F.m != G.m:
            raise InconsistentDataError("F and G must share sample set and order")
        Fd, Gd = F.data, G.data
    else:
        Fd = np.atleast_2d(np.asarray(F, dtype=float))
        Gd = np.atleast_2d(np.asarray(G, dtype=float))
        if Fd.shape != Gd.shape:
            raise InconsistentDataError("F and G must have the same shape")
    m = Fd.shape[0] - 1
    H = np.zeros_like(Fd)
    if H0 is not None:
        H[0] = np.asarray(H0, dtype=float)
    for k in range(1, m + 1):
        acc = np.zeros(Fd.shape[1])
        for i in range(k):
            acc += math.comb(k - 1, i) * (Fd[k - i] * Gd[i] - Gd[k - i] * Fd[i])
        H[k] = 2.0 * acc
    if as_jet:
        return ScalarJet(F.K, m, H)
    return H
