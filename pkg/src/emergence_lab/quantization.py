"""Best N-point approximation of a discrete measure in W1.

On the line and the circle the optimal N-atom approximation splits the sorted
atoms into contiguous groups, each served by its weighted median; this is an
exact dynamic program. On 2D spaces centres are restricted to the support and
found by k-medoids, which gives an upper bound on the true optimum (at most
twice it, by the triangle inequality).
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numba
import numpy as np

from .spaces import DiscreteMeasure
from .transport import w1_distance


class Quantization(NamedTuple):
    measure: DiscreteMeasure
    error: float
    exact: bool


# --------------------------------------------------------------------------
# 1D dynamic programme


@numba.njit(cache=True)
def _median_index(W, i, j):
    # smallest t in [i, j) with W[t+1] - W[i] >= (W[j] - W[i]) / 2
    half = W[i] + 0.5 * (W[j] - W[i])
    lo, hi = i, j - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if W[mid + 1] >= half:
            hi = mid
        else:
            lo = mid + 1
    return lo


@numba.njit(cache=True)
def _group_cost(x, W, S, i, j):
    m = _median_index(W, i, j)
    left = x[m] * (W[m] - W[i]) - (S[m] - S[i])
    right = (S[j] - S[m + 1]) - x[m] * (W[j] - W[m + 1])
    c = left + right
    return c if c > 0.0 else 0.0


@numba.njit(cache=True)
def _dp_layer(x, W, S, prev, cur, arg, k):
    # cur[j] = min_{i<j} prev[i] + cost(i, j), j >= k, via divide and conquer on
    # the monotone argmin (1D k-median costs satisfy the quadrangle inequality)
    n = len(x)
    stack = np.empty((4 * n + 8, 4), dtype=np.int64)
    top = 0
    stack[0, 0], stack[0, 1], stack[0, 2], stack[0, 3] = k, n, k - 1, n - 1
    top = 1
    while top > 0:
        top -= 1
        lo, hi, olo, ohi = stack[top, 0], stack[top, 1], stack[top, 2], stack[top, 3]
        if lo > hi:
            continue
        mid = (lo + hi) // 2
        best = np.inf
        besti = olo
        upper = min(ohi, mid - 1)
        for i in range(olo, upper + 1):
            v = prev[i] + _group_cost(x, W, S, i, mid)
            if v < best:
                best = v
                besti = i
        cur[mid] = best
        arg[mid] = besti
        stack[top, 0], stack[top, 1], stack[top, 2], stack[top, 3] = lo, mid - 1, olo, besti
        top += 1
        stack[top, 0], stack[top, 1], stack[top, 2], stack[top, 3] = mid + 1, hi, besti, ohi
        top += 1


@numba.njit(cache=True)
def _dp_all(x, w, kmax):
    n = len(x)
    W = np.zeros(n + 1)
    S = np.zeros(n + 1)
    for t in range(n):
        W[t + 1] = W[t] + w[t]
        S[t + 1] = S[t] + w[t] * x[t]
    cost = np.full((kmax + 1, n + 1), np.inf)
    args = np.zeros((kmax + 1, n + 1), dtype=np.int64)
    for j in range(1, n + 1):
        cost[1, j] = _group_cost(x, W, S, 0, j)
    for k in range(2, kmax + 1):
        _dp_layer(x, W, S, cost[k - 1], cost[k], args[k], k)
    return cost, args, W


def _line_partition(x, w, kmax):
    """Optimal costs for 1..kmax groups and a back-tracking closure."""
    kmax = min(kmax, len(x))
    cost, args, W = _dp_all(x, w, kmax)
    n = len(x)

    def groups(k):
        bounds = [n]
        j = n
        for layer in range(k, 1, -1):
            j = int(args[layer, j])
            bounds.append(j)
        bounds.append(0)
        return bounds[::-1]

    return cost[1:, n], groups, W


def _centres_from_bounds(x, w, W, bounds):
    pts, mass = [], []
    for i, j in zip(bounds[:-1], bounds[1:]):
        m = int(_median_index(W, i, j))
        pts.append(x[m])
        mass.append(W[j] - W[i])
    mass = np.asarray(mass)
    return np.asarray(pts), mass / mass.sum()


def _circle_k1(x, w):
    # a circular 1-median sits at an atom: the objective is concave between atoms
    d = np.abs(x[:, None] - x[None, :])
    d = np.minimum(d, 1.0 - d)
    totals = d @ w
    i = int(np.argmin(totals))
    return float(totals[i]), i


def _quantize_line(mu: DiscreteMeasure, n_atoms: int):
    x, w = mu.coords, mu.weights
    costs, groups, W = _line_partition(x, w, n_atoms)
    pts, mass = _centres_from_bounds(x, w, W, groups(len(costs)))
    return DiscreteMeasure(mu.space, pts, mass)


def _quantize_circle(mu: DiscreteMeasure, n_atoms: int):
    x, w = mu.coords, mu.weights
    if n_atoms == 1:
        _, i = _circle_k1(x, w)
        return DiscreteMeasure(mu.space, [x[i]], [1.0])
    # optimal Voronoi cells are arcs; cutting the circle at a cell boundary
    # turns the problem into the line problem on the unrolled atoms
    best, best_meas = math.inf, None
    n = len(x)
    for s in range(n):
        xs = np.concatenate([x[s:], x[:s] + 1.0])
        ws = np.concatenate([w[s:], w[:s]])
        costs, groups, W = _line_partition(xs, ws, n_atoms)
        if costs[-1] < best - 1e-15:
            best = costs[-1]
            pts, mass = _centres_from_bounds(xs, ws, W, groups(len(costs)))
            best_meas = (pts, mass)
    return DiscreteMeasure(mu.space, best_meas[0], best_meas[1])


# --------------------------------------------------------------------------
# k-medoids on a precomputed distance matrix


def farthest_first(D: np.ndarray, k: int, first: int) -> list[int]:
    """Farthest-first traversal; ties go to the lowest index."""
    centres = [int(first)]
    nearest = D[first].copy()
    while len(centres) < k:
        nxt = int(np.argmax(nearest))
        if nearest[nxt] <= 0:
            # fewer than k distinct points: pad with unused indices
            unused = [i for i in range(len(D)) if i not in centres]
            nxt = unused[0]
        centres.append(nxt)
        nearest = np.minimum(nearest, D[nxt])
    return centres


def medoid_cost(D, w, medoids) -> float:
    return math.fsum(w * D[np.asarray(medoids)].min(axis=0))


@numba.njit(cache=True)
def _nearest_two(D, med):
    M = D.shape[0]
    k = len(med)
    near = np.zeros(M, dtype=np.int64)
    d1 = np.full(M, np.inf)
    d2 = np.full(M, np.inf)
    for j in range(M):
        for i in range(k):
            d = D[med[i], j]
            if d < d1[j]:
                d2[j] = d1[j]
                d1[j] = d
                near[j] = i
            elif d < d2[j]:
                d2[j] = d
    return near, d1, d2


@numba.njit(cache=True)
def _eager_swap(D, w, med, max_pass):
    """Single-swap local search applying each improving swap at once.

    For a candidate o, the change of cost when medoid i leaves and o joins
    is removal[i] plus per-point corrections, all in one pass over the data.
    """
    M = D.shape[0]
    k = len(med)
    is_med = np.zeros(M, dtype=np.bool_)
    for i in range(k):
        is_med[med[i]] = True
    near, d1, d2 = _nearest_two(D, med)
    removal = np.zeros(k)
    for j in range(M):
        removal[near[j]] += w[j] * (d2[j] - d1[j])
    delta = np.empty(k)
    total = 0.0
    for j in range(M):
        total += w[j] * d1[j]
    last_swap = -1
    for _ in range(max_pass):
        for o in range(M):
            if o == last_swap:
                return med
            if is_med[o]:
                continue
            delta[:] = removal
            shared = 0.0
            for j in range(M):
                d = D[o, j]
                if d < d1[j]:
                    shared += w[j] * (d - d1[j])
                    delta[near[j]] += w[j] * (d1[j] - d2[j])
                elif d < d2[j]:
                    delta[near[j]] += w[j] * (d - d2[j])
            best = 0
            for i in range(1, k):
                if delta[i] < delta[best]:
                    best = i
            if delta[best] + shared < -1e-12 * max(total, 1e-300):
                is_med[med[best]] = False
                is_med[o] = True
                med[best] = o
                near, d1, d2 = _nearest_two(D, med)
                removal[:] = 0.0
                total = 0.0
                for j in range(M):
                    removal[near[j]] += w[j] * (d2[j] - d1[j])
                    total += w[j] * d1[j]
                last_swap = o
        if last_swap == -1:
            return med
    return med


def _pam_swap(D, w, medoids, max_pass=100):
    med = np.array(medoids, dtype=np.int64)
    if len(med) < 2:
        # with one medoid the best single swap is the global 1-medoid
        return [int(np.argmin(np.asarray(D) @ w))]
    return [int(i) for i in _eager_swap(np.ascontiguousarray(D, dtype=float), np.asarray(w, dtype=float), med, max_pass)]


def _alternate(D, w, medoids, max_iter=100):
    medoids = list(medoids)
    for _ in range(max_iter):
        nearest = np.argmin(D[medoids], axis=0)
        changed = False
        for c in range(len(medoids)):
            members = np.flatnonzero(nearest == c)
            if len(members) == 0:
                continue
            within = D[np.ix_(members, members)] @ w[members]
            best = int(members[int(np.argmin(within))])
            if best != medoids[c] and within.min() < (D[medoids[c], members] @ w[members]) - 1e-15:
                medoids[c] = best
                changed = True
        if not changed:
            break
    return medoids


def kmedoids(D, k, weights=None, restarts=10, seed=0, method="auto"):
    """Weighted k-medoids: farthest-first seeding, swap refinement, restarts.

    Returns ``(medoids, cost)`` with medoids as a sorted index array. Among
    restarts with equal cost the lexicographically smallest medoid set wins.
    ``method`` is ``"pam"`` (single-swap local search over all
    medoid/non-medoid pairs, improving swaps applied eagerly), ``"alternate"``
    (within-cluster moves only); ``"auto"`` means ``"pam"``.
    """
    D = np.asarray(D, dtype=float)
    M = len(D)
    w = np.full(M, 1.0 / M) if weights is None else np.asarray(weights, dtype=float)
    if k < 1:
        raise ValueError("k must be at least 1")
    if k >= M:
        return np.arange(M), 0.0
    if method == "auto":
        method = "pam"
    refine = _pam_swap if method == "pam" else _alternate
    best_key = None
    best = None
    for r in range(restarts):
        if r == 0:
            first = int(np.argmin(D @ w))
        else:
            first = int(np.random.default_rng([seed, r]).integers(M))
        med = farthest_first(D, k, first)
        if method == "pam":
            # cheap within-cluster moves first leave few global swaps to do
            med = _alternate(D, w, med)
        med = refine(D, w, med)
        med = sorted(set(med))
        cost = medoid_cost(D, w, med)
        key = (round(cost, 12), tuple(med))
        if best_key is None or key < best_key:
            best_key, best = key, (np.asarray(med), cost)
    return best


def assign(D, medoids):
    """Index (into ``medoids``) of the nearest medoid for each point; ties -> lowest."""
    return np.argmin(D[np.asarray(medoids)], axis=0)


def _quantize_medoids(mu: DiscreteMeasure, n_atoms: int, seed: int = 0):
    D = mu.space.cost_matrix(mu.points, mu.points)
    med, _ = kmedoids(D, n_atoms, mu.weights, seed=seed)
    lab = assign(D, med)
    mass = np.bincount(lab, weights=mu.weights, minlength=len(med))
    nu = DiscreteMeasure(mu.space, mu.points[med], mass / mass.sum())
    # sending each atom to its nearest centre is optimal for the induced weights
    err = math.fsum(mu.weights * D[med][lab, np.arange(len(mu))])
    return nu, err


# --------------------------------------------------------------------------
# public operations


def quantize_best(mu: DiscreteMeasure, n_atoms: int, seed: int = 0) -> Quantization:
    """Best ``n_atoms``-supported approximation of ``mu`` and its W1 error."""
    if int(n_atoms) != n_atoms or n_atoms < 1:
        raise ValueError("n_atoms must be a positive integer")
    n_atoms = int(n_atoms)
    exact = mu.space.box_dimension == 1
    if n_atoms >= len(mu):
        return Quantization(mu, 0.0, True)
    if mu.space.kind == "unit_interval":
        nu = _quantize_line(mu, n_atoms)
    elif mu.space.kind == "circle":
        nu = _quantize_circle(mu, n_atoms)
    else:
        nu, err = _quantize_medoids(mu, n_atoms, seed)
        return Quantization(nu, err, False)
    return Quantization(nu, w1_distance(mu, nu), exact)


def quantization_errors(mu: DiscreteMeasure, kmax: int) -> np.ndarray:
    """Optimal W1 errors for 1..kmax atoms on the unit interval (one DP run)."""
    if mu.space.kind != "unit_interval":
        return np.array([quantize_best(mu, k).error for k in range(1, kmax + 1)])
    costs, _, _ = _line_partition(mu.coords, mu.weights, kmax)
    out = np.zeros(kmax)
    out[: len(costs)] = costs
    return out


def quantization_number(mu: DiscreteMeasure, eps: float, seed: int = 0) -> int:
    """Smallest N whose best N-atom approximation is within W1 error < eps.

    Exact on 1D spaces; an upper bound on 2D spaces (medoid centres).
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if eps >= mu.space.diameter or len(mu) == 1:
        return 1

    def ok(k):
        return quantize_best(mu, k, seed).error < eps

    hi = 1
    while not ok(hi):
        if hi >= len(mu):
            return len(mu)
        hi = min(2 * hi, len(mu))
    lo = hi // 2  # ok(lo) is False (or lo == 0)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi
