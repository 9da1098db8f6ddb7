"""Exact periodic points of the expanding maps mul_k and tent.

Every fixed point of f^n is a rational p/q with q one of kⁿ-1 (mul_k),
2ⁿ-1 or 2ⁿ+1 (tent). Orbits are traced on integer numerators, so nothing
here touches floating point until the final measures are built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dynamics import DynamicalSystem
from .spaces import DiscreteMeasure, uniform_measure
from .transport import w1_distance

MAX_PERIOD = 20
MAX_POINTS = 1 << 21


@dataclass(frozen=True)
class PeriodicPoints:
    """All fixed points of f^n, as numerators over per-point denominators.

    ``orbit_id[i]`` labels the orbit of point i; orbits are numbered in order
    of their smallest point.
    """

    system: DynamicalSystem
    n: int
    numerators: np.ndarray
    denominators: np.ndarray
    orbit_id: np.ndarray

    @property
    def count(self) -> int:
        return len(self.numerators)

    @property
    def values(self) -> np.ndarray:
        return self.numerators / self.denominators

    def fractions(self) -> list[Fraction]:
        return [Fraction(int(p), int(q)) for p, q in zip(self.numerators, self.denominators)]

    def orbits(self) -> list[tuple[Fraction, ...]]:
        """Orbits as tuples of exact points, each starting at its smallest point
        and listed in dynamical order."""
        out = []
        first = {}
        for i, lab in enumerate(self.orbit_id):
            first.setdefault(int(lab), i)
        for lab in sorted(first):
            i = first[lab]
            p, q = int(self.numerators[i]), int(self.denominators[i])
            cycle = [Fraction(p, q)]
            nxt = Fraction(_step_int(self.system, p, q), q)
            while nxt != cycle[0]:
                cycle.append(nxt)
                nxt = Fraction(_step_int(self.system, nxt.numerator * (q // nxt.denominator), q), q)
            out.append(tuple(cycle))
        return out

    def measure(self) -> DiscreteMeasure:
        """Equidistribution on Fix(f^n)."""
        return DiscreteMeasure(self.system.space, self.values)

    def orbit_measures(self) -> list[DiscreteMeasure]:
        """Uniform measure on each orbit (ergodic invariant measures)."""
        vals = self.values
        return [DiscreteMeasure(self.system.space, vals[self.orbit_id == lab]) for lab in np.unique(self.orbit_id)]


def _step_int(sys, p, q):
    if sys.kind == "mul_k":
        return (sys.params[0] * p) % q
    return 2 * p if 2 * p <= q else 2 * q - 2 * p


def _step_array(sys, P, q):
    if sys.kind == "mul_k":
        return (sys.params[0] * P) % q
    return np.where(2 * P <= q, 2 * P, 2 * q - 2 * P)


def _label_orbits(sys, P, q, n):
    """Smallest numerator on each point's orbit (orbits stay on one denominator)."""
    rep = P.copy()
    cur = P.copy()
    for _ in range(n - 1):
        cur = _step_array(sys, cur, q)
        np.minimum(rep, cur, out=rep)
    return rep


def periodic_points(sys: DynamicalSystem, n: int) -> PeriodicPoints:
    """All points with f^n(x) = x, grouped into orbits.

    mul_k: j/(kⁿ-1), j < kⁿ-1. tent: inverting the itinerary of each of the
    2ⁿ monotone branches of tentⁿ gives m/(2ⁿ-1) for even branch index m and
    (m+1)/(2ⁿ+1) for odd m.
    """
    if sys.kind not in ("mul_k", "tent"):
        raise ValueError("periodic points are enumerated for mul_k and tent only")
    if not 1 <= n <= MAX_PERIOD:
        raise ValueError(f"period must lie in 1..{MAX_PERIOD}")
    if sys.kind == "mul_k":
        q = sys.params[0] ** n - 1
        if q > MAX_POINTS:
            raise ValueError(f"{q} periodic points exceed the size guard {MAX_POINTS}")
        P = np.arange(q, dtype=np.int64)
        Q = np.full(q, q, dtype=np.int64)
        rep = _label_orbits(sys, P, q, n)
        keys = rep
    else:
        m = np.arange(1 << n, dtype=np.int64)
        even = m % 2 == 0
        qa, qb = (1 << n) - 1, (1 << n) + 1
        P = np.where(even, m, m + 1)
        Q = np.where(even, qa, qb)
        rep = np.empty_like(P)
        rep[even] = _label_orbits(sys, P[even], qa, n)
        rep[~even] = _label_orbits(sys, P[~even], qb, n)
        keys = rep * 2 + (~even)
    # label orbits by their smallest point value
    uniq, inv = np.unique(keys, return_inverse=True)
    first = np.full(len(uniq), -1)
    order = np.argsort(P / Q, kind="stable")
    for i in order:
        if first[inv[i]] < 0:
            first[inv[i]] = i
    rank = np.empty(len(uniq), dtype=np.int64)
    rank[np.argsort((P / Q)[first], kind="stable")] = np.arange(len(uniq))
    return PeriodicPoints(sys, n, P, Q, rank[inv])


def periodic_count(sys: DynamicalSystem, n: int) -> int:
    """Card Fix(f^n) in closed form."""
    if sys.kind == "mul_k":
        return sys.params[0] ** n - 1
    if sys.kind == "tent":
        return 2**n
    raise ValueError("closed-form counts exist for mul_k and tent only")


def verify_periodic(points: PeriodicPoints, tol: float = 1e-9) -> float:
    """Largest ``d(f^n(p), p)`` over the points, iterating exactly."""
    sys, n = points.system, points.n
    worst = 0.0
    for p, q in zip(points.numerators.tolist(), points.denominators.tolist()):
        cur = p
        for _ in range(n):
            cur = _step_int(sys, cur, q)
        d = abs(cur - p) / q
        if sys.space.periodic:
            d = min(d, 1.0 - d)
        worst = max(worst, d)
    if worst > tol:
        raise AssertionError(f"periodic point check failed: {worst}")
    return worst


def periodic_growth(sys: DynamicalSystem, n_max: int, delta: float = 0.5):
    """Rows ``(n, count, log(count)/n, log(count)/n^(1+delta))`` for n = 1..n_max."""
    rows = []
    for n in range(1, n_max + 1):
        c = periodic_count(sys, n)
        lc = math.log(c) if c > 1 else 0.0
        rows.append((n, c, lc / n, lc / n ** (1.0 + delta)))
    return rows


def equidistribution_profile(sys: DynamicalSystem, periods, reference_size: int = 1 << 20):
    """W1 distance from the periodic-point measure to Lebesgue, per period."""
    ref = uniform_measure(sys.space, reference_size)
    return [(n, w1_distance(periodic_points(sys, n).measure(), ref)) for n in periods]
