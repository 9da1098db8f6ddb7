"""Covering-number bounds for the space of probability measures under W1."""

from __future__ import annotations

import math
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .spaces import DiscreteMeasure, PointSpace, as_space
from .transport import w1_distance


class CoveringBounds(NamedTuple):
    lower: int
    upper: int
    truncated: bool
    candidates: int


def _grid(space: PointSpace, pitch: float) -> np.ndarray:
    if space.periodic:
        g = max(1, math.ceil(1.0 / pitch))
        axis = np.arange(g) / g
    else:
        g = math.ceil(1.0 / pitch) + 1
        axis = np.arange(g) / (g - 1)
    if space.box_dimension == 1:
        return axis.reshape(-1, 1)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel()])


def _positive_compositions(total: int, parts: int):
    """Ordered ways to write ``total`` as a sum of ``parts`` positive ints."""
    for bars in combinations(range(1, total), parts - 1):
        yield np.diff(np.concatenate([[0], bars, [total]]))


def _support_level(G: int, K: int, s: int, rng, limit: int | None):
    """Candidates with exactly ``s`` atoms, shuffled; at most ``limit`` when given."""
    size = math.comb(G, s) * math.comb(K - 1, s - 1)
    if limit is None or size <= limit:
        rows = []
        for pos in combinations(range(G), s):
            for comp in _positive_compositions(K, s):
                row = np.zeros(G, dtype=np.int64)
                row[list(pos)] = comp
                rows.append(row)
        rows = np.array(rows, dtype=np.int64)
        return rows[rng.permutation(len(rows))]
    seen, rows = set(), []
    attempts = 0
    while len(rows) < limit and attempts < 20 * limit:
        attempts += 1
        pos = rng.choice(G, size=s, replace=False)
        bars = np.sort(rng.choice(np.arange(1, K), size=s - 1, replace=False))
        row = np.zeros(G, dtype=np.int64)
        row[pos] = np.diff(np.concatenate([[0], bars, [K]]))
        key = row.tobytes()
        if key not in seen:
            seen.add(key)
            rows.append(row)
    return np.array(rows, dtype=np.int64).reshape(-1, G)


def candidate_family(space, eps: float, budget: int, seed: int = 0):
    """Grid measures used for packing: atoms on a pitch-eps/2 grid, weights in (1/K)N.

    Candidates come in order of increasing support size, shuffled with a
    fixed seed inside each size. Returns ``(grid, counts, complete)`` where
    each row of ``counts`` holds integer masses (out of ``K``) on the grid.
    """
    space = as_space(space)
    grid = _grid(space, eps / 2.0)
    K = math.ceil(2.0 / eps)
    G = len(grid)
    rng = np.random.default_rng(seed)
    levels, used = [], 0
    complete = True
    for s in range(1, min(G, K) + 1):
        room = budget - used
        if room <= 0:
            complete = False
            break
        size = math.comb(G, s) * math.comb(K - 1, s - 1)
        rows = _support_level(G, K, s, rng, None if size <= room else room)
        if size > room:
            complete = False
        levels.append(rows)
        used += len(rows)
    return grid, np.vstack(levels), complete


def _packing_1d(space, grid, counts, sep):
    K = counts[0].sum()
    cdf = np.cumsum(counts, axis=1) / K
    x = grid[:, 0]
    if space.periodic:
        h = 1.0 / len(x)
        kmed = math.ceil(len(x) / 2) - 1
    else:
        h = np.diff(x)
    chosen = []
    acc = np.empty((0, cdf.shape[1]))
    for row in cdf:
        if len(acc):
            diff = acc - row
            if space.periodic:
                # lengths are equal, so the weighted median is an order statistic
                m = np.sort(diff, axis=1)[:, kmed]
                dist = np.abs(diff - m[:, None]).sum(axis=1) * h
            else:
                dist = np.abs(diff[:, :-1]) @ h
            if np.any(dist < sep - 1e-12):
                continue
        acc = np.vstack([acc, row])
        chosen.append(row)
    return len(chosen)


def _packing_general(space, grid, counts, sep):
    K = counts[0].sum()
    chosen = []
    for row in counts:
        mask = row > 0
        mu = DiscreteMeasure(space, grid[mask], row[mask] / K)
        if all(w1_distance(mu, nu) >= sep - 1e-12 for nu in chosen):
            chosen.append(mu)
    return len(chosen)


def covering_upper(space, eps: float) -> int:
    """Size of an explicit eps-cover of the probability measures by grid measures.

    1D: snapping atoms to a pitch-eps/2 grid moves mass at most eps/4, and
    rounding the CDF at grid points to multiples of 1/K, K = ceil(2/eps),
    costs at most 1/(2K) <= eps/4. 2D: snapping costs at most eps*sqrt(2)/4;
    rounding G masses changes total variation by at most G/(2K), costing
    diam*G/(2K) <= 0.6 eps for the K chosen below.
    """
    space = as_space(space)
    if eps >= space.diameter:
        return 1
    grid = _grid(space, eps / 2.0)
    G = len(grid)
    if space.box_dimension == 1:
        K = math.ceil(2.0 / eps)
    else:
        K = math.ceil(space.diameter * G / (1.2 * eps))
    return math.comb(K + G - 1, G - 1)


def measure_space_covering_bounds(space, eps: float, budget: int = 20_000, seed: int = 0) -> CoveringBounds:
    """Lower and upper bounds on the eps-covering number H(eps) of (M(X), W1).

    The lower bound is a greedy packing (pairwise W1 >= 2 eps) of grid
    measures; no eps-ball holds two of them. It is flagged ``truncated`` when
    the candidate family exceeds ``budget`` and was subsampled.
    """
    space = as_space(space)
    if not eps > 0:
        raise ValueError("eps must be positive")
    if eps >= space.diameter:
        return CoveringBounds(1, 1, False, 1)
    grid, counts, complete = candidate_family(space, eps, budget, seed)
    if space.box_dimension == 1:
        lower = _packing_1d(space, grid, counts, 2.0 * eps)
    else:
        lower = _packing_general(space, grid, counts, 2.0 * eps)
    return CoveringBounds(lower, covering_upper(space, eps), not complete, len(counts))
