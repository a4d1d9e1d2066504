"""Jets on finite sample sets and Whitney-field validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InconsistentDataError
from .modulus import ModulusOfContinuity

DEFAULT_MAX_POINTS = 4096
_BLOCK = 256


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Finite, strictly increasing stand-in for a compact set ``K``."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).ravel()
        if pts.size < 2:
            raise DomainError("a sample set needs at least two points")
        if not np.all(np.isfinite(pts)) or np.any(np.diff(pts) <= 0):
            raise DomainError("sample set points must be finite and strictly increasing")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def hull(self):
        return float(self.points[0]), float(self.points[-1])

    @property
    def diam(self) -> float:
        return float(self.points[-1] - self.points[0])

    def __len__(self):
        return self.points.size

    def __eq__(self, other):
        return isinstance(other, SampleSet) and np.array_equal(self.points, other.points)

    __hash__ = None

    def index(self, x: float) -> int:
        i = int(np.searchsorted(self.points, x))
        if i >= self.points.size or self.points[i] != x:
            raise DomainError(f"point {x} is not in the sample set")
        return i

    def gaps(self):
        return list(zip(self.points[:-1].tolist(), self.points[1:].tolist()))


@dataclass(frozen=True, eq=False)
class ScalarJet:
    """Values ``data[k, j] = F^k(K[j])`` for ``0 <= k <= m``."""

    K: SampleSet
    m: int
    data: np.ndarray

    def __post_init__(self):
        if not isinstance(self.K, SampleSet):
            object.__setattr__(self, "K", SampleSet(self.K))
        m = int(self.m)
        if m < 0:
            raise DomainError("jet order must be nonnegative")
        data = np.array(self.data, dtype=float).reshape(m + 1, -1) if np.size(self.data) else None
        if data is None or data.shape != (m + 1, len(self.K)):
            raise InconsistentDataError(
                f"jet data must have shape ({m + 1}, {len(self.K)})")
        if not np.all(np.isfinite(data)):
            raise DomainError("jet data must be finite")
        data.flags.writeable = False
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_derivatives(cls, K, derivs) -> "ScalarJet":
        """Jet from callables ``derivs[k](x) = F^k(x)``."""
        K = K if isinstance(K, SampleSet) else SampleSet(K)
        data = np.array([np.broadcast_to(d(K.points), K.points.shape) for d in derivs])
        return cls(K, len(derivs) - 1, data)

    def truncate(self, m: int) -> "ScalarJet":
        if not 0 <= m <= self.m:
            raise DomainError(f"cannot truncate order {self.m} jet to order {m}")
        return ScalarJet(self.K, m, self.data[: m + 1])

    def at(self, x: float) -> np.ndarray:
        return self.data[:, self.K.index(x)]

    def to_json(self) -> dict:
        return {"K": self.K.points.tolist(), "m": self.m, "F": self.data.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "ScalarJet":
        return cls(SampleSet(obj["K"]), obj["m"], obj["F"])


@dataclass(frozen=True, eq=False)
class HorizontalJetTriple:
    """Jets ``F, G, H`` of the three coordinates on a shared sample set."""

    F: ScalarJet
    G: ScalarJet
    H: ScalarJet

    def __post_init__(self):
        if not (self.F.K == self.G.K == self.H.K):
            raise InconsistentDataError("F, G, H must share the sample set")
        if not (self.F.m == self.G.m == self.H.m):
            raise InconsistentDataError("F, G, H must share the order")

    @property
    def K(self) -> SampleSet:
        return self.F.K

    @property
    def m(self) -> int:
        return self.F.m

    def truncate(self, m: int) -> "HorizontalJetTriple":
        return HorizontalJetTriple(self.F.truncate(m), self.G.truncate(m), self.H.truncate(m))

    def leibniz_defect(self) -> float:
        """Largest relative mismatch between ``H^k`` and the Leibniz value."""
        from .heisenberg import leibniz_vertical_jet

        L = leibniz_vertical_jet(self.F.data, self.G.data)
        if self.m == 0:
            return 0.0
        diff = np.abs(self.H.data[1:] - L[1:]) / (1.0 + np.abs(L[1:]))
        return float(diff.max())

    @property
    def leibniz_consistent(self) -> bool:
        return self.leibniz_defect() <= 1e-8

    def translated(self, p) -> "HorizontalJetTriple":
        """Jets of ``p * gamma``; all orders shift linearly."""
        F, G, H = self.F.data, self.G.data, self.H.data
        Fn, Gn = F.copy(), G.copy()
        Fn[0] += p.x
        Gn[0] += p.y
        Hn = H + 2.0 * (p.y * F - p.x * G)
        Hn[0] += p.z
        K, m = self.K, self.m
        return HorizontalJetTriple(ScalarJet(K, m, Fn), ScalarJet(K, m, Gn), ScalarJet(K, m, Hn))

    def to_json(self) -> dict:
        return {"K": self.K.points.tolist(), "m": self.m,
                "F": self.F.data.tolist(), "G": self.G.data.tolist(), "H": self.H.data.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "HorizontalJetTriple":
        K = SampleSet(obj["K"])
        m = obj["m"]
        return cls(ScalarJet(K, m, obj["F"]), ScalarJet(K, m, obj["G"]), ScalarJet(K, m, obj["H"]))


def remainder(F: ScalarJet, a: float, x: float, k: int) -> float:
    """``F^k(x) - sum_l F^{k+l}(a) (x - a)^l / l!``."""
    if not 0 <= k <= F.m:
        raise DomainError(f"order {k} outside 0..{F.m}")
    ia, ix = F.K.index(a), F.K.index(x)
    d = x - a
    taylor = sum(F.data[k + l, ia] * d ** l / math.factorial(l) for l in range(F.m - k + 1))
    return float(F.data[k, ix] - taylor)


def _remainder_blocks(F: ScalarJet, max_points):
    """Yield ``(rows, d, R)`` with ``R[k]`` the remainders from anchors ``rows``."""
    n = len(F.K)
    if max_points is not None and n > max_points:
        raise DomainError(f"|K| = {n} exceeds the pair-scan cap {max_points}")
    x = F.K.points
    fact = np.array([math.factorial(l) for l in range(F.m + 1)], dtype=float)
    for start in range(0, n, _BLOCK):
        rows = np.arange(start, min(n, start + _BLOCK))
        d = x[None, :] - x[rows][:, None]
        powers = [np.ones_like(d)]
        for _ in range(F.m):
            powers.append(powers[-1] * d)
        R = np.empty((F.m + 1,) + d.shape)
        for k in range(F.m + 1):
            taylor = np.zeros_like(d)
            for l in range(F.m - k + 1):
                taylor += F.data[k + l, rows][:, None] * powers[l] / fact[l]
            R[k] = F.data[k][None, :] - taylor
        yield rows, d, R


@dataclass
class DecayProfile:
    """Max normalized remainder per dyadic gap scale, largest scale first."""

    scales: list
    values: list
    trend: str

    def as_pairs(self):
        return list(zip(self.scales, self.values))


@dataclass
class WhitneyFieldReport:
    best_constant: float
    worst_witness: tuple
    per_order: list
    decay_profile: DecayProfile = field(default=None)

    def to_json(self) -> dict:
        return {
            "best_constant": self.best_constant,
            "worst_witness": list(self.worst_witness) if self.worst_witness else None,
            "per_order": self.per_order,
            "decay_profile": None if self.decay_profile is None else {
                "pairs": [list(p) for p in self.decay_profile.as_pairs()],
                "trend": self.decay_profile.trend},
        }


def validate_cmw(F: ScalarJet, omega: ModulusOfContinuity,
                 max_points: int | None = DEFAULT_MAX_POINTS,
                 with_profile: bool = True) -> WhitneyFieldReport:
    """Smallest ``C`` with ``|R_a F^k(b)| <= C omega(|b-a|) |b-a|^(m-k)`` on ``K``.

    The witness is ``(a, b, k)`` for the first maximizer in scan order.
    """
    best, witness = 0.0, None
    per_order = [0.0] * (F.m + 1)
    x = F.K.points
    for rows, d, R in _remainder_blocks(F, max_points):
        ad = np.abs(d)
        off = ad > 0
        w = np.ones_like(ad)
        w[off] = omega(ad[off])
        for k in range(F.m + 1):
            denom = w * ad ** (F.m - k)
            ratio = np.where(off, 0.0, -1.0)
            ratio[off] = np.abs(R[k][off]) / denom[off]
            top = max(float(ratio.max()), 0.0)
            per_order[k] = max(per_order[k], top)
            if top > best or witness is None:
                i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
                best = top
                witness = (float(x[rows[i]]), float(x[j]), k)
    profile = cm_decay_diagnostic(F, max_points) if with_profile and len(F.K) >= 4 else None
    return WhitneyFieldReport(best, witness, per_order, profile)


def cm_decay_diagnostic(F: ScalarJet, max_points: int | None = DEFAULT_MAX_POINTS) -> DecayProfile:
    """Dyadic profile of ``max_k |R^k| / |b-a|^(m-k)``.

    A finite set cannot certify a limit, so the verdict is a trend label:
    ``vanishing`` (all zero up to rounding), ``decaying`` (nonincreasing
    toward small scales and at least halved overall) or ``non-decaying``.
    """
    if len(F.K) < 4:
        raise DomainError("the decay diagnostic needs at least 4 points")
    diam = F.K.diam
    best = {}
    scale_data = float(np.max(np.abs(F.data))) or 1.0
    for _, d, R in _remainder_blocks(F, max_points):
        ad = np.abs(d)
        off = ad > 0
        bins = np.floor(np.log2(ad[off] / diam)).astype(int)
        vals = np.zeros(bins.size)
        for k in range(F.m + 1):
            vals = np.maximum(vals, np.abs(R[k][off]) / ad[off] ** (F.m - k))
        for b in np.unique(bins):
            v = float(vals[bins == b].max())
            best[b] = max(best.get(b, 0.0), v)
    keys = sorted(best, reverse=True)
    scales = [diam * 2.0 ** b for b in keys]
    values = [best[b] for b in keys]
    tiny = 1e-11 * scale_data
    if all(v <= tiny for v in values):
        trend = "vanishing"
    elif all(values[i + 1] <= values[i] * 1.05 + tiny for i in range(len(values) - 1)) \
            and values[-1] <= 0.5 * values[0]:
        trend = "decaying"
    else:
        trend = "non-decaying"
    return DecayProfile(scales, values, trend)
