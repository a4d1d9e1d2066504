"""Moduli of continuity.

A modulus here is a continuous, nondecreasing, concave function with
``omega(0) == 0``. Three kinds are supported: power ``t**alpha``, linear
``t`` and a piecewise-linear table built from knots.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InconsistentDataError

_CONCAVITY_SLACK = 1e-12


@dataclass(frozen=True)
class ModulusOfContinuity:
    """Immutable modulus of continuity.

    Use the constructors :meth:`power`, :meth:`linear` and :meth:`table`
    rather than instantiating directly.
    """

    kind: str
    alpha: float = 1.0
    knots: tuple = ()
    domain_cap: float = math.inf
    _t: np.ndarray = field(default=None, repr=False, compare=False)
    _w: np.ndarray = field(default=None, repr=False, compare=False)

    @classmethod
    def linear(cls, domain_cap: float = math.inf) -> "ModulusOfContinuity":
        return cls(kind="linear", alpha=1.0, domain_cap=_check_cap(domain_cap))

    @classmethod
    def power(cls, alpha: float, domain_cap: float = math.inf) -> "ModulusOfContinuity":
        if not 0.0 < alpha <= 1.0:
            raise DomainError(f"power modulus needs alpha in (0, 1], got {alpha}")
        return cls(kind="power", alpha=float(alpha), domain_cap=_check_cap(domain_cap))

    @classmethod
    def table(cls, knots, domain_cap: float = math.inf) -> "ModulusOfContinuity":
        """Piecewise-linear modulus through ``knots = [(t, w), ...]``.

        A knot at the origin is added when missing. Knots must be strictly
        increasing in ``t`` with nonnegative, nonincreasing secant slopes;
        otherwise the offending triple is named in the error.
        """
        pts = sorted((float(t), float(w)) for t, w in knots)
        if not pts:
            raise InconsistentDataError("table modulus needs at least one knot")
        if pts[0][0] < 0:
            raise DomainError("table modulus knots must have t >= 0")
        if pts[0][0] == 0.0:
            if pts[0][1] != 0.0:
                raise InconsistentDataError("table modulus must satisfy omega(0) = 0")
        else:
            pts.insert(0, (0.0, 0.0))
        if len(pts) < 2:
            raise InconsistentDataError("table modulus needs a knot with t > 0")
        t = np.array([p[0] for p in pts])
        w = np.array([p[1] for p in pts])
        if np.any(np.diff(t) <= 0):
            raise InconsistentDataError("table modulus knots must have distinct t values")
        slopes = np.diff(w) / np.diff(t)
        if np.any(slopes < 0):
            i = int(np.argmax(slopes < 0))
            raise InconsistentDataError(
                f"table modulus decreases between t={t[i]} and t={t[i + 1]}")
        for i in range(len(slopes) - 1):
            if slopes[i + 1] > slopes[i] * (1 + _CONCAVITY_SLACK) + _CONCAVITY_SLACK:
                triple = tuple(zip(t[i:i + 3].tolist(), w[i:i + 3].tolist()))
                raise InconsistentDataError(f"table modulus is not concave at knots {triple}")
        t.flags.writeable = False
        w.flags.writeable = False
        return cls(kind="table", knots=tuple(pts), domain_cap=_check_cap(domain_cap), _t=t, _w=w)

    @classmethod
    def from_json(cls, obj: dict) -> "ModulusOfContinuity":
        kind = obj.get("kind")
        cap = obj.get("domain_cap", math.inf)
        if kind == "linear":
            return cls.linear(cap)
        if kind == "power":
            return cls.power(obj["alpha"], cap)
        if kind == "table":
            return cls.table(obj["knots"], cap)
        raise DomainError(f"unknown modulus kind {kind!r}")

    @classmethod
    def parse(cls, spec: str) -> "ModulusOfContinuity":
        """Parse the command-line form ``linear``, ``power:0.5`` or ``table:<path>``."""
        if spec == "linear":
            return cls.linear()
        if spec.startswith("power:"):
            return cls.power(float(spec.split(":", 1)[1]))
        if spec.startswith("table:"):
            import json
            with open(spec.split(":", 1)[1]) as fh:
                obj = json.load(fh)
            knots = obj["knots"] if isinstance(obj, dict) else obj
            return cls.table(knots)
        raise DomainError(f"cannot parse modulus {spec!r}")

    def to_json(self) -> dict:
        if self.kind == "linear":
            return {"kind": "linear"}
        if self.kind == "power":
            return {"kind": "power", "alpha": self.alpha}
        return {"kind": "table", "knots": [list(k) for k in self.knots]}

    def __call__(self, t):
        """Evaluate the modulus; accepts scalars or arrays."""
        arr = np.asarray(t, dtype=float)
        if np.any(arr < 0) or np.any(arr > self.domain_cap) or np.any(np.isnan(arr)):
            raise DomainError(f"modulus evaluated outside [0, {self.domain_cap}]")
        if self.kind == "linear":
            out = arr.copy()
        elif self.kind == "power":
            out = arr ** self.alpha
        else:
            out = np.interp(arr, self._t, self._w)
            beyond = arr > self._t[-1]
            if np.any(beyond):
                last = max((self._w[-1] - self._w[-2]) / (self._t[-1] - self._t[-2]), 0.0)
                out = np.where(beyond, self._w[-1] + last * (arr - self._t[-1]), out)
        if np.ndim(t) == 0:
            return float(out)
        return out


def _check_cap(cap):
    cap = float(cap)
    if not cap > 0:
        raise DomainError("domain_cap must be positive")
    return cap


def eval_modulus(omega: ModulusOfContinuity, t):
    return omega(t)


def holder_seminorm(values, omega: ModulusOfContinuity, m: int = 0) -> float:
    """Finite-sample lower bound for the ``C^{m,omega}`` seminorm.

    ``values`` is a sequence of ``(point, value)`` pairs holding samples of
    the m-th derivative. Returns the maximum over pairs of
    ``|v(x) - v(y)| / omega(|x - y|)``. Repeated points must repeat the
    same value.
    """
    merged = {}
    for x, v in values:
        x, v = float(x), float(v)
        if x in merged and merged[x] != v:
            raise InconsistentDataError(f"point {x} carries values {merged[x]} and {v}")
        merged[x] = v
    if len(merged) < 2:
        raise DomainError("holder_seminorm needs at least two distinct points")
    best = 0.0
    for (x, u), (y, v) in itertools.combinations(sorted(merged.items()), 2):
        best = max(best, abs(u - v) / omega(abs(x - y)))
    return best
