"""Exact Wasserstein-1 (Kantorovich-Rubinstein) distance between discrete measures.

1D spaces use closed forms on cumulative distribution functions. On the
square and the 2-torus the discrete transportation problem is solved exactly
by successive shortest paths with Dijkstra on reduced costs.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit
from scipy.optimize import linear_sum_assignment

from ._parallel import parallel_map
from .spaces import DiscreteMeasure

_FLOW_EPS = 1e-15


def _check_pair(a: DiscreteMeasure, b: DiscreteMeasure):
    if not isinstance(a, DiscreteMeasure) or not isinstance(b, DiscreteMeasure):
        raise TypeError("w1_distance expects two DiscreteMeasure objects")
    if a.space != b.space:
        raise ValueError(f"measures live on different spaces ({a.space} vs {b.space})")


@njit(cache=True)
def _merge_sorted(xa, wa, xb, wb):
    na, nb = len(xa), len(xb)
    pos = np.empty(na + nb)
    diff = np.empty(na + nb)
    i = j = 0
    acc = 0.0
    for k in range(na + nb):
        if j >= nb or (i < na and xa[i] <= xb[j]):
            pos[k] = xa[i]
            acc += wa[i]
            i += 1
        else:
            pos[k] = xb[j]
            acc -= wb[j]
            j += 1
        diff[k] = acc
    return pos, diff


def _cdf_difference(xa, wa, xb, wb):
    """Breakpoints and F_a - F_b on the intervals between them."""
    if len(xa) > 64 and np.all(xa[1:] >= xa[:-1]) and np.all(xb[1:] >= xb[:-1]):
        # canonical atoms are sorted: a linear merge replaces the sort
        return _merge_sorted(xa, wa, xb, wb)
    pos = np.concatenate([xa, xb])
    mass = np.concatenate([wa, -wb])
    order = np.argsort(pos, kind="stable")
    pos = pos[order]
    diff = np.cumsum(mass[order])
    return pos, diff


def w1_line(xa, wa, xb, wb) -> float:
    """W1 on the real line from sorted or unsorted atoms and weights."""
    pos, diff = _cdf_difference(xa, wa, xb, wb)
    return float(np.dot(np.abs(diff[:-1]), np.diff(pos)))


@njit(cache=True)
def _circle_sorted(xa, wa, xb, wb):
    pos, diff = _merge_sorted(xa, wa, xb, wb)
    n = len(pos)
    values = np.empty(n + 1)
    lengths = np.empty(n + 1)
    values[0] = 0.0
    lengths[0] = pos[0]
    for k in range(1, n):
        values[k] = diff[k - 1]
        lengths[k] = pos[k] - pos[k - 1]
    values[n] = diff[n - 1]
    lengths[n] = 1.0 - pos[n - 1]
    lo, hi = values.min(), values.max()
    if hi > lo:
        nbins = 1024
        scale = nbins / (hi - lo)
        bins = np.empty(n + 1, dtype=np.int64)
        cum = np.zeros(nbins)
        for k in range(n + 1):
            b = min(int((values[k] - lo) * scale), nbins - 1)
            bins[k] = b
            cum[b] += lengths[k]
        half = 0.5 * lengths.sum()
        acc = 0.0
        target = nbins - 1
        for b in range(nbins):
            if acc + cum[b] >= half:
                target = b
                break
            acc += cum[b]
        sel = np.flatnonzero(bins == target)
        v = values[sel]
        w = lengths[sel]
        order = np.argsort(v, kind="mergesort")
        offset = v[order[-1]]
        for k in order:
            acc += w[k]
            if acc >= half:
                offset = v[k]
                break
    else:
        offset = lo
    total = 0.0
    for k in range(n + 1):
        total += abs(values[k] - offset) * lengths[k]
    return total


def w1_circle(xa, wa, xb, wb) -> float:
    """W1 on R/Z: integral of |F_a - F_b - m| with m a median of F_a - F_b."""
    if len(xa) > 64 and np.all(xa[1:] >= xa[:-1]) and np.all(xb[1:] >= xb[:-1]):
        return float(_circle_sorted(xa, wa, xb, wb))
    pos, diff = _cdf_difference(xa, wa, xb, wb)
    # intervals [0, p0), [p_k, p_{k+1}), [p_last, 1)
    lengths = np.concatenate([[pos[0]], np.diff(pos), [1.0 - pos[-1]]])
    values = np.concatenate([[0.0], diff[:-1], [diff[-1]]])
    offset = weighted_median(values, lengths)
    return float(np.dot(np.abs(values - offset), lengths))


def weighted_median(values, weights) -> float:
    """Smallest value at which the cumulative weight reaches half the total."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if len(values) > 4096:
        # histogram selection: only the bin holding the median gets sorted
        lo, hi = values.min(), values.max()
        if hi > lo:
            bins = np.minimum(((values - lo) * (1024 / (hi - lo))).astype(np.int64), 1023)
            cum = np.cumsum(np.bincount(bins, weights=weights, minlength=1024))
            half = 0.5 * cum[-1]
            b = min(int(np.searchsorted(cum, half, side="left")), 1023)
            sel = bins == b
            below = cum[b - 1] if b > 0 else 0.0
            v, w = values[sel], weights[sel]
            order = np.argsort(v, kind="stable")
            k = int(np.searchsorted(below + np.cumsum(w[order]), half, side="left"))
            return float(v[order][min(k, len(v) - 1)])
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    k = int(np.searchsorted(cum, 0.5 * cum[-1], side="left"))
    return float(values[order][min(k, len(order) - 1)])


@njit(cache=True)
def _ssp_kernel(cost, supply, demand, tol):
    m, n = cost.shape
    plan = np.zeros((m, n))
    pot_u = np.zeros(m)
    pot_v = np.zeros(n)
    dist_u = np.empty(m)
    dist_v = np.empty(n)
    pred_u = np.empty(m, dtype=np.int64)
    pred_v = np.empty(n, dtype=np.int64)
    done_u = np.empty(m, dtype=np.bool_)
    done_v = np.empty(n, dtype=np.bool_)
    inf = np.inf
    while supply.max() > tol and demand.max() > tol:
        for i in range(m):
            dist_u[i] = 0.0 if supply[i] > tol else inf
            pred_u[i] = -1
            done_u[i] = False
        for j in range(n):
            dist_v[j] = inf
            pred_v[j] = -1
            done_v[j] = False
        target = -1
        while True:
            iu, iv = -1, -1
            bu, bv = inf, inf
            for i in range(m):
                if not done_u[i] and dist_u[i] < bu:
                    bu, iu = dist_u[i], i
            for j in range(n):
                if not done_v[j] and dist_v[j] < bv:
                    bv, iv = dist_v[j], j
            if iu < 0 and iv < 0:
                break
            if iu >= 0 and bu <= bv:
                done_u[iu] = True
                for j in range(n):
                    if done_v[j]:
                        continue
                    rc = cost[iu, j] + pot_u[iu] - pot_v[j]
                    cand = bu + (rc if rc > 0.0 else 0.0)
                    if cand < dist_v[j]:
                        dist_v[j] = cand
                        pred_v[j] = iu
            else:
                done_v[iv] = True
                if demand[iv] > tol:
                    target = iv
                    break
                for i in range(m):
                    if done_u[i] or plan[i, iv] <= tol:
                        continue
                    rc = -(cost[i, iv] + pot_u[i] - pot_v[iv])
                    cand = bv + (rc if rc > 0.0 else 0.0)
                    if cand < dist_u[i]:
                        dist_u[i] = cand
                        pred_u[i] = iv
        if target < 0:
            break
        reach = dist_v[target]
        for i in range(m):
            pot_u[i] += min(dist_u[i], reach)
        for j in range(n):
            pot_v[j] += min(dist_v[j], reach)
        # walk back: target <- pred_v <- pred_u <- ... <- source
        j = target
        i = pred_v[j]
        delta = demand[target]
        while pred_u[i] >= 0:
            jj = pred_u[i]
            delta = min(delta, plan[i, jj])
            i = pred_v[jj]
        delta = min(delta, supply[i])
        source = i
        j = target
        i = pred_v[j]
        while True:
            plan[i, j] += delta
            if pred_u[i] < 0:
                break
            jj = pred_u[i]
            plan[i, jj] -= delta
            j = jj
            i = pred_v[j]
        supply[source] -= delta
        demand[target] -= delta
    total = 0.0
    for i in range(m):
        for j in range(n):
            if plan[i, j] < 0.0:
                plan[i, j] = 0.0
            total += plan[i, j] * cost[i, j]
    return total, plan


def transport_ssp(cost: np.ndarray, a: np.ndarray, b: np.ndarray):
    """Min-cost transport plan by successive shortest augmenting paths.

    ``cost`` is an ``(m, n)`` non-negative matrix, ``a`` and ``b`` supplies and
    demands of equal total mass. Returns ``(value, plan)``. Dijkstra on
    reduced costs with dense O(m + n) scans per settled node.
    """
    cost = np.ascontiguousarray(cost, dtype=float)
    supply = np.array(a, dtype=float)
    demand = np.array(b, dtype=float)
    demand *= supply.sum() / demand.sum()
    total, plan = _ssp_kernel(cost, supply, demand, _FLOW_EPS)
    return float(total), plan


def _uniform_equal(a: DiscreteMeasure, b: DiscreteMeasure) -> bool:
    k = len(a)
    if k != len(b) or k < 2:
        return False
    return bool(np.all(a.weights == a.weights[0]) and np.all(b.weights == b.weights[0]))


def w1_distance(a: DiscreteMeasure, b: DiscreteMeasure) -> float:
    """Exact Wasserstein-1 distance between two measures on the same space."""
    _check_pair(a, b)
    if a == b:
        return 0.0
    kind = a.space.kind
    if kind == "unit_interval":
        return w1_line(a.coords, a.weights, b.coords, b.weights)
    if kind == "circle":
        return w1_circle(a.coords, a.weights, b.coords, b.weights)
    cost = a.space.cost_matrix(a.points, b.points)
    if _uniform_equal(a, b):
        # equal-weight atoms: an optimal plan is a permutation
        rows, cols = linear_sum_assignment(cost)
        return float(math.fsum(cost[rows, cols]) / len(a))
    return transport_ssp(cost, a.weights, b.weights)[0]


def pairwise_w1(measures, others=None) -> np.ndarray:
    """Matrix of W1 distances; symmetric with zero diagonal when ``others`` is None."""
    measures = list(measures)
    group = measures + (list(others) if others is not None else [])
    if group and all(m.is_dirac for m in group):
        # W1 between Dirac masses is the distance between their atoms
        space = group[0].space
        if any(m.space != space for m in group):
            raise ValueError("measures live on different spaces")
        pts = np.vstack([m.points for m in measures])
        other = pts if others is None else np.vstack([m.points for m in others])
        return space.cost_matrix(pts, other)
    if others is None:
        k = len(measures)
        pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
        vals = parallel_map(lambda ij: w1_distance(measures[ij[0]], measures[ij[1]]), pairs)
        out = np.zeros((k, k))
        for (i, j), v in zip(pairs, vals):
            out[i, j] = out[j, i] = v
        return out
    others = list(others)
    pairs = [(i, j) for i in range(len(measures)) for j in range(len(others))]
    vals = parallel_map(lambda ij: w1_distance(measures[ij[0]], others[ij[1]]), pairs)
    return np.array(vals, dtype=float).reshape(len(measures), len(others))
