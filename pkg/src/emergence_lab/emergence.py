"""Metric emergence of empirical clouds, periodic-orbit packings, local order.

Centres of the upper bound are cloud members (medoids). Lower bounds are
certified for arbitrary centre measures:

* small clouds: if N measures achieve mean distance < eps, moving each one
  to its nearest member at most doubles every member's distance, so the
  exact medoid optimum at 2 eps is a lower bound;
* any cloud: the mean residual is the integral over r of the weight
  farther than r from every centre; an r-ball holds at most the weight of
  the largest member-centred 2r-ball, B(r), so N centres leave a residual
  of at least the integral of (1 - N B(r))^+.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np

from .cloud import EmpiricalCloud
from .dynamics import DynamicalSystem
from .periodic import periodic_points
from .quantization import kmedoids
from .scaling import OrderEstimate, order_of
from .spaces import DiscreteMeasure
from .transport import pairwise_w1, w1_distance

EXACT_LIMIT = 12
LINEAR_SCAN_LIMIT = 64


@dataclass(frozen=True)
class EmergenceResult:
    eps: float
    N_upper: int
    N_lower: int
    centers: tuple
    mean_residual: float
    residual_stderr: float
    N_exact: int | None = None
    flags: tuple = ()


@dataclass(frozen=True)
class EmergenceCurve:
    eps_grid: tuple
    records: tuple
    provenance: dict = field(default_factory=dict)

    def column(self, name):
        return [getattr(r, name) for r in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps", "N_lower", "N_upper", "mean_residual", "flags"])
        for r in self.records:
            w.writerow([format(r.eps, ".17g"), r.N_lower, r.N_upper, format(r.mean_residual, ".17g"), ";".join(r.flags)])
        return buf.getvalue()


# -- optimisation on a distance matrix ---------------------------------------


def exact_emergence(D: np.ndarray, weights, eps: float) -> tuple[int, tuple]:
    """Smallest N with an N-subset of members of weighted mean distance < eps.

    Exhaustive over subsets; ties go to the lexicographically smallest subset.
    """
    M = len(D)
    w = np.asarray(weights, dtype=float)
    for k in range(1, M + 1):
        for sub in combinations(range(M), k):
            if float(w @ D[list(sub)].min(axis=0)) < eps:
                return k, sub
    return M, tuple(range(M))


def _upper(D, w, eps, restarts, seed):
    M = len(D)

    def solve(k):
        med, cost = kmedoids(D, k, w, restarts=restarts, seed=seed)
        return tuple(int(i) for i in med), cost

    if M <= LINEAR_SCAN_LIMIT:
        for k in range(1, M + 1):
            med, cost = solve(k)
            if cost < eps:
                return k, med
        return M, tuple(range(M))
    # doubling then bisection on k
    hi, found = 1, None
    while True:
        med, cost = solve(hi)
        if cost < eps:
            found = (hi, med)
            break
        if hi >= M:
            return M, tuple(range(M))
        hi = min(2 * hi, M)
    lo = hi // 2
    while found[0] - lo > 1:
        mid = (lo + found[0]) // 2
        med, cost = solve(mid)
        if cost < eps:
            found = (mid, med)
        else:
            lo = mid
    return found


def max_ball_mass(D, weights, radii) -> np.ndarray:
    """Upper bound on the cloud weight any W1-ball of radius r can hold.

    A ball of radius r containing member i lies inside the 2r-ball around i,
    so the largest member-centred 2r-ball mass bounds it.
    """
    w = np.asarray(weights, dtype=float)
    order = np.argsort(D, axis=1, kind="stable")
    sd = np.take_along_axis(D, order, axis=1)
    cw = np.cumsum(w[order], axis=1)
    targets = 2.0 * np.asarray(radii, dtype=float)
    out = np.zeros(len(targets))
    for i in range(len(D)):
        k = np.searchsorted(sd[i], targets, side="right")
        np.maximum(out, np.where(k > 0, cw[i, np.maximum(k - 1, 0)], 0.0), out=out)
    return np.minimum(out, 1.0)


def layer_cake_lower_bound(D, weights, eps, radii=None) -> int:
    """Smallest N not excluded by the layer-cake bound.

    The mean residual of N centres is the integral over r of the weight
    farther than r from every centre, which is at least 1 - N B(r) with B
    from :func:`max_ball_mass`. Lower Riemann sums over ``radii`` keep the
    bound certified.
    """
    if radii is None:
        radii = np.unique(np.concatenate([[0.0], D.ravel() / 2.0]))
        if len(radii) > 2000:
            radii = np.quantile(radii, np.linspace(0.0, 1.0, 2000))
    radii = np.asarray(radii, dtype=float)
    B = max_ball_mass(D, weights, radii[1:])
    widths = np.diff(radii)

    def bound(N):
        return float(np.dot(widths, np.maximum(1.0 - N * B, 0.0)))

    N = 1
    while N < len(D) and not bound(N) < eps:
        N += 1
    return N


# -- public operations ------------------------------------------------------


def recompute_residuals(cloud: EmpiricalCloud, centers) -> np.ndarray:
    """Distance of every member to its nearest centre, from fresh W1 calls."""
    cs = [cloud.members[c] for c in centers]
    return np.array([min(w1_distance(m, c) for c in cs) for m in cloud.members])


def _radius_grid(cloud):
    # one grid per cloud keeps N_lower monotone in eps
    grid = cloud.__dict__.get("_radius_grid")
    if grid is None:
        D = cloud.distances
        grid = np.unique(np.concatenate([[0.0], D.ravel() / 2.0]))
        if len(grid) > 2000:
            grid = np.quantile(grid, np.linspace(0.0, 1.0, 2000))
        cloud.__dict__["_radius_grid"] = grid
    return grid


def metric_emergence(cloud: EmpiricalCloud, eps: float, restarts: int = 10, seed: int = 0) -> EmergenceResult:
    """Bounds on the number of measures needed to approximate the cloud
    members within mean W1 distance < eps.

    ``N_upper`` is the smallest k for which k-medoids (farthest-first seeds,
    swap refinement, ``restarts`` restarts) gets the weighted mean residual
    below eps; ``N_lower`` is certified for unrestricted centres (see module
    notes). For clouds of at most 12 members ``N_exact`` is the exhaustive
    medoid optimum at eps.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    M = len(cloud)
    w = cloud.weights
    flags = []
    if not cloud.has_distances:
        # one row settles the common N = 1 case without the full matrix
        res = recompute_residuals(cloud, [0])
        if float(w @ res) < eps:
            return _result(eps, 1, 1, (0,), res, w, 1 if M <= EXACT_LIMIT else None, ())
    D = cloud.distances
    n_up, centers = _upper(D, w, eps, restarts, seed)
    res = recompute_residuals(cloud, centers)
    if not float(w @ res) < eps:
        flags.append("residual_not_below_eps")
    if n_up == M and M > 1:
        flags.append("capped_at_cloud_size")
    n_low = layer_cake_lower_bound(D, w, eps, _radius_grid(cloud))
    n_exact = None
    if M <= EXACT_LIMIT:
        n_exact = exact_emergence(D, w, eps)[0]
        n_low = max(n_low, exact_emergence(D, w, 2.0 * eps)[0])
    if n_low > n_up:
        flags.append("lower_bound_clipped")
        n_low = n_up
    return _result(eps, n_up, n_low, centers, res, w, n_exact, tuple(flags))


def _result(eps, n_up, n_low, centers, res, w, n_exact, flags):
    mean = float(w @ res)
    var = float(w @ (res - mean) ** 2)
    stderr = math.sqrt(var / len(res)) if len(res) > 1 else 0.0
    return EmergenceResult(float(eps), int(n_up), int(n_low), tuple(int(c) for c in centers), mean, stderr, n_exact, flags)


def emergence_curve(cloud: EmpiricalCloud, eps_grid, restarts: int = 10, seed: int = 0) -> EmergenceCurve:
    """metric_emergence over a strictly decreasing eps grid; raw values,
    never repaired for monotonicity."""
    eps_grid = tuple(float(e) for e in eps_grid)
    if any(b >= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise ValueError("eps grid must be strictly decreasing")
    records = tuple(metric_emergence(cloud, e, restarts, seed) for e in eps_grid)
    prov = {
        "system": cloud.system.name,
        "horizon": cloud.horizon,
        "sample_count": cloud.sample_count,
        "seed": cloud.seed,
        "reference": cloud.reference,
        "convergence_diagnostic": cloud.diagnostic,
        "diagnostic_slack": cloud.diagnostic_slack,
        "member_shift": cloud.member_shift,
    }
    return EmergenceCurve(eps_grid, records, prov)


def periodic_orbit_measures(sys: DynamicalSystem, max_period: int) -> list[DiscreteMeasure]:
    """Uniform measures on the primitive periodic orbits of period <= max_period,
    ordered by period and then by smallest point."""
    if not 1 <= max_period <= 16:
        raise ValueError("max_period must lie in 1..16")
    out = []
    for n in range(1, max_period + 1):
        pp = periodic_points(sys, n)
        for mu in pp.orbit_measures():
            if len(mu) == n:
                out.append(mu)
    return out


@lru_cache(maxsize=8)
def _orbit_family(sys, max_period, limit):
    cands = periodic_orbit_measures(sys, max_period)
    D = pairwise_w1(cands[:limit])
    D.setflags(write=False)
    return cands, D


def periodic_measure_packing(sys: DynamicalSystem, max_period: int, separation: float, full_search_limit: int = 600) -> list[DiscreteMeasure]:
    """Family of periodic-orbit measures pairwise more than ``separation``
    apart in W1.

    The first ``full_search_limit`` candidates (shortest periods) are packed
    by a minimum-degree greedy independent set on their conflict graph
    (pairs within ``separation``); the remaining candidates are then scanned
    once in order and kept when they fit.
    """
    cands, D = _orbit_family(sys, max_period, full_search_limit)
    head = cands[:full_search_limit]
    conflict = D <= separation
    np.fill_diagonal(conflict, False)
    alive = np.ones(len(head), dtype=bool)
    chosen = []
    while alive.any():
        deg = np.where(alive, (conflict & alive).sum(axis=1), np.iinfo(np.int64).max)
        i = int(np.argmin(deg))  # ties -> lowest index
        chosen.append(i)
        alive[i] = False
        alive[conflict[i]] = False
    kept = [head[i] for i in sorted(chosen)]
    for mu in cands[full_search_limit:]:
        if all(w1_distance(mu, nu) > separation for nu in kept):
            kept.append(mu)
    return kept


def topological_emergence_lower(sys: DynamicalSystem, max_period: int, eps: float) -> int:
    """Lower bound for the eps-covering number of the ergodic measures: a
    2 eps-separated family of periodic-orbit measures (each eps-ball holds at
    most one of them)."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    return len(periodic_measure_packing(sys, max_period, 2.0 * eps))


def ball_masses(cloud: EmpiricalCloud, center: DiscreteMeasure, eps_grid) -> np.ndarray:
    """Cloud weight of the closed W1-ball B(center, eps) for each eps."""
    d = np.array([w1_distance(m, center) for m in cloud.members])
    return np.array([float(cloud.weights[d <= e].sum()) for e in eps_grid])


def local_emergence_order(cloud: EmpiricalCloud, center: DiscreteMeasure, eps_grid) -> OrderEstimate:
    """Regression of log(-log mass B(center, eps)) on -log eps.

    Scales with mass 1 (log-log undefined) or mass 0 (empty ball) are dropped
    and flagged; a ball of full mass at every scale gives a degenerate,
    flagged estimate.
    """
    if len(cloud) < 100:
        raise ValueError("local order needs a cloud of at least 100 members")
    eps_grid = [float(e) for e in eps_grid]
    masses = ball_masses(cloud, center, eps_grid)
    full = masses >= 1.0 - 1e-12
    empty = int(np.count_nonzero(masses <= 0))
    samples = [(e, -math.log(m)) for e, m, f in zip(eps_grid, masses, full) if m > 0 and not f]
    est = order_of(samples, log_values=True)
    extra = []
    if empty:
        extra.append(f"dropped_{empty}_empty_balls")
    if np.all(full):
        extra.append("degenerate_full_mass")
    elif np.any(full):
        extra.append(f"dropped_{int(np.count_nonzero(full))}_full_balls")
    return OrderEstimate(est.slope, est.intercept, est.stderr, est.points, est.quotients, est.usable_scale_count, est.flags + tuple(extra))


def local_order_comparison(cloud: EmpiricalCloud, eps_grid, n_centres: int = 20, curve: EmergenceCurve | None = None) -> dict:
    """Mean local order over the first ``n_centres`` members next to the
    global emergence order; reported side by side, nothing asserted."""
    ests = [local_emergence_order(cloud, cloud.members[i], eps_grid) for i in range(min(n_centres, len(cloud)))]
    slopes = [e.slope for e in ests if not math.isnan(e.slope)]
    out = {
        "mean_local_order": float(np.mean(slopes)) if slopes else math.nan,
        "usable_centres": len(slopes),
        "global_order": math.nan,
    }
    if curve is not None:
        out["global_order"] = order_of(list(zip(curve.eps_grid, curve.column("N_upper")))).slope
    return out
