import math

import numpy as np
import pytest

from emergence_lab.covering import candidate_family, covering_upper, measure_space_covering_bounds
from emergence_lab.spaces import DiscreteMeasure
from emergence_lab.transport import pairwise_w1


def test_large_eps_is_one():
    assert measure_space_covering_bounds("circle", 0.5) == (1, 1, False, 1)


@pytest.mark.parametrize("space,eps", [("unit_interval", 0.3), ("circle", 0.2), ("square", 0.6)])
def test_lower_le_upper(space, eps):
    b = measure_space_covering_bounds(space, eps, budget=3000)
    assert 1 <= b.lower <= b.upper


def test_upper_bound_1d_formula():
    # grid of pitch eps/2 on [0,1]: G = ceil(2/eps) + 1 points, K = ceil(2/eps) mass units
    eps = 0.2
    G, K = 11, 10
    assert covering_upper("unit_interval", eps) == math.comb(K + G - 1, G - 1)


def test_candidates_ordered_by_support_size():
    grid, counts, complete = candidate_family("unit_interval", 0.4, 10_000)
    sizes = (counts > 0).sum(axis=1)
    assert complete
    assert np.all(np.diff(sizes) >= 0)
    assert np.all(counts.sum(axis=1) == math.ceil(2 / 0.4))


def test_budget_truncates():
    _, counts, complete = candidate_family("unit_interval", 0.15, 500)
    assert not complete and len(counts) <= 500
    assert measure_space_covering_bounds("unit_interval", 0.15, budget=500).truncated


def test_upper_cover_really_covers_1d():
    # every random measure lies within eps of the snapped-and-rounded grid measure
    eps = 0.25
    rng = np.random.default_rng(0)
    pitch = eps / 2
    K = math.ceil(2 / eps)
    grid = np.linspace(0, 1, math.ceil(1 / pitch) + 1)
    for _ in range(50):
        w = rng.random(6)
        mu = DiscreteMeasure("unit_interval", rng.random(6), w / w.sum())
        snapped = np.clip(np.round(mu.coords / (grid[1] - grid[0])).astype(int), 0, len(grid) - 1)
        mass = np.bincount(snapped, weights=mu.weights, minlength=len(grid))
        cdf = np.round(np.cumsum(mass) * K) / K
        cdf[-1] = 1.0
        rounded = np.diff(np.concatenate([[0.0], cdf]))
        nu = DiscreteMeasure("unit_interval", grid[rounded > 0], rounded[rounded > 0])
        assert pairwise_w1([mu], [nu])[0, 0] < eps
