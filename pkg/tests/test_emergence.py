import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import brute_emergence, random_measure

from emergence_lab.cloud import cloud_from_measures, sample_cloud
from emergence_lab.dynamics import identity, mul_k, tent
from emergence_lab.emergence import (
    ball_masses,
    emergence_curve,
    exact_emergence,
    layer_cake_lower_bound,
    local_emergence_order,
    local_order_comparison,
    max_ball_mass,
    metric_emergence,
    periodic_measure_packing,
    periodic_orbit_measures,
    topological_emergence_lower,
)
from emergence_lab.spaces import dirac, uniform_measure
from emergence_lab.transport import pairwise_w1


def _dirac_cloud(xs, weights=None):
    return cloud_from_measures([dirac("unit_interval", x) for x in xs], weights)


def test_exact_emergence_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(20):
        ms = [random_measure(rng, "circle", 3) for _ in range(7)]
        D = pairwise_w1(ms)
        w = np.full(7, 1 / 7)
        for eps in (0.1, 0.05, 0.02):
            assert exact_emergence(D, w, eps)[0] == brute_emergence(D, w, eps)


@given(st.lists(st.floats(0, 1), min_size=2, max_size=12), st.sampled_from([0.2, 0.1, 0.05, 0.02]))
def test_bounds_sandwich_exact_on_dirac_line_clouds(xs, eps):
    # on the line, the best centre for a group of Dirac members is the Dirac at a
    # member median, so the medoid optimum is the true optimum and bounds must bracket it
    c = _dirac_cloud(xs)
    r = metric_emergence(c, eps)
    assert r.N_exact is not None
    assert r.N_lower <= r.N_exact <= r.N_upper <= r.N_exact + 1
    assert r.mean_residual < eps


def test_n_lower_monotone_in_eps():
    c = cloud_from_measures([dirac("unit_interval", x) for x in np.random.default_rng(1).random(80)])
    curve = emergence_curve(c, (0.2, 0.1, 0.05, 0.025, 0.0125))
    lows = curve.column("N_lower")
    ups = curve.column("N_upper")
    assert lows == sorted(lows)
    assert all(a <= b for a, b in zip(lows, ups))


def test_identity_grid_cloud_close_to_quarter_law():
    c = _dirac_cloud((np.arange(400) + 0.5) / 400)
    for eps in (0.1, 0.05, 0.025):
        assert abs(metric_emergence(c, eps).N_upper - math.ceil(1 / (4 * eps))) <= 1


def test_layer_cake_bound_is_certified_on_uniform_line():
    # N Dirac centres can bring the mean distance of a uniform cloud no lower than 1/(4N)
    x = (np.arange(200) + 0.5) / 200
    D = np.abs(x[:, None] - x[None, :])
    w = np.full(200, 1 / 200)
    for eps in (0.1, 0.05):
        assert layer_cake_lower_bound(D, w, eps) <= math.ceil(1 / (4 * eps))


def test_max_ball_mass():
    D = np.array([[0, 0.1, 1.0], [0.1, 0, 1.0], [1.0, 1.0, 0]])
    B = max_ball_mass(D, np.full(3, 1 / 3), [0.01, 0.05, 0.6])
    assert B.tolist() == pytest.approx([1 / 3, 2 / 3, 1.0])


def test_identical_members_zero_residual_and_stderr():
    r = metric_emergence(_dirac_cloud([0.3] * 5), 0.01)
    assert (r.N_upper, r.N_lower) == (1, 1)
    assert r.mean_residual == 0.0 and r.residual_stderr == 0.0


def test_spread_residuals_positive_stderr():
    # one medoid serves both members: residuals 0 and 0.2
    c = cloud_from_measures([dirac("circle", x) for x in (0.4, 0.6)], [0.5, 0.5])
    r = metric_emergence(c, 0.5)
    assert r.N_upper == 1 and r.residual_stderr > 0


def test_capped_flag():
    r = metric_emergence(_dirac_cloud([0.0, 0.5, 1.0]), 1e-9)
    assert r.N_upper == 3 and "capped_at_cloud_size" in r.flags


def test_weighted_cloud():
    c = _dirac_cloud([0.0, 1.0], [0.99, 0.01])
    assert metric_emergence(c, 0.02).N_upper == 1
    assert metric_emergence(c, 0.005).N_upper == 2


def test_mul2_cloud_needs_one_measure():
    c = sample_cloud(mul_k(2), 12, 20_000, seed=3)
    r = metric_emergence(c, 0.05)
    assert r.N_upper == 1 and r.N_lower == 1


def test_curve_csv_and_grid_validation():
    c = _dirac_cloud(np.linspace(0, 1, 30))
    curve = emergence_curve(c, (0.2, 0.1))
    assert curve.to_csv().splitlines()[0] == "eps,N_lower,N_upper,mean_residual,flags"
    assert curve.provenance["sample_count"] == 30
    with pytest.raises(ValueError):
        emergence_curve(c, (0.1, 0.2))
    with pytest.raises(ValueError):
        metric_emergence(c, 0.0)


def test_periodic_orbit_measures_primitive_counts():
    # primitive orbits of x -> 2x mod 1 with period 1..4: 1, 1, 2, 3
    ms = periodic_orbit_measures(mul_k(2), 4)
    assert [len(m) for m in ms] == [1, 2, 3, 3, 4, 4, 4]
    with pytest.raises(ValueError):
        periodic_orbit_measures(mul_k(2), 17)


@pytest.mark.parametrize("sep", [0.2, 0.1, 0.05])
def test_packing_separated_and_maximal(sep):
    kept = periodic_measure_packing(mul_k(2), 7, sep)
    D = pairwise_w1(kept)
    assert np.all(D[np.triu_indices(len(kept), 1)] > sep)
    cands = periodic_orbit_measures(mul_k(2), 7)
    R = pairwise_w1(cands, kept)
    assert np.all(R.min(axis=1) <= sep)


def test_packing_at_0_2_holds_three_measures():
    assert len(periodic_measure_packing(mul_k(2), 8, 0.2)) >= 3


def test_topological_lower_monotone():
    counts = [topological_emergence_lower(mul_k(2), 8, e) for e in (0.2, 0.1, 0.05)]
    assert counts == sorted(counts)
    assert topological_emergence_lower(tent(), 6, 0.05) >= topological_emergence_lower(tent(), 6, 0.1)
    with pytest.raises(ValueError):
        topological_emergence_lower(mul_k(2), 4, 0.0)


def test_variational_consistency_bernoulli_cloud():
    cloud = sample_cloud(mul_k(2), 30, 5000, seed=2, reference="bernoulli_mixture")
    for eps in (0.1, 0.05):
        cover = len(periodic_measure_packing(mul_k(2), 8, eps / 2))
        assert metric_emergence(cloud, eps).N_upper <= cover


def test_ball_masses_and_local_order():
    c = cloud_from_measures([dirac("unit_interval", x) for x in (np.arange(200) + 0.5) / 200])
    centre = dirac("unit_interval", 0.5)
    grid = (0.2, 0.1, 0.05, 0.025)
    m = ball_masses(c, centre, grid)
    assert m.tolist() == pytest.approx([0.4, 0.2, 0.1, 0.05])
    est = local_emergence_order(c, centre, grid)
    assert est.usable_scale_count == 4 and 0 < est.slope < 1


def test_local_order_flags():
    c = cloud_from_measures([dirac("circle", 0.5)] * 100)
    est = local_emergence_order(c, dirac("circle", 0.5), (0.1, 0.05, 0.01))
    assert "degenerate_full_mass" in est.flags
    far = local_emergence_order(c, dirac("circle", 0.0), (0.1, 0.05, 0.01))
    assert any("empty" in f for f in far.flags)
    with pytest.raises(ValueError):
        local_emergence_order(_dirac_cloud([0.1] * 10), dirac("unit_interval", 0.1), (0.1, 0.05, 0.01))


def test_local_order_comparison_side_by_side():
    c = cloud_from_measures([dirac("unit_interval", x) for x in (np.arange(150) + 0.5) / 150])
    grid = (0.2, 0.1, 0.05, 0.025)
    out = local_order_comparison(c, grid, 5, emergence_curve(c, grid))
    assert out["usable_centres"] == 5
    assert not math.isnan(out["mean_local_order"]) and not math.isnan(out["global_order"])
