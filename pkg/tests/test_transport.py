import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import lp_transport, lp_w1, random_measure

from emergence_lab.spaces import DiscreteMeasure, dirac, uniform_measure
from emergence_lab.transport import pairwise_w1, transport_ssp, w1_distance, weighted_median

SPACES = ["unit_interval", "circle", "square", "torus2"]


def test_dirac_distance_is_point_distance():
    assert w1_distance(dirac("circle", 0.1), dirac("circle", 0.8)) == pytest.approx(0.3)
    assert w1_distance(dirac("square", [0, 0]), dirac("square", [0.3, 0.4])) == pytest.approx(0.5)


def test_interval_uniform_to_endpoint():
    # int_0^1 x dx
    assert w1_distance(uniform_measure("unit_interval", 1000), dirac("unit_interval", 0.0)) == pytest.approx(0.5)


def test_circle_lebesgue_to_point():
    # int of the circle distance to 0 over R/Z is 1/4
    assert w1_distance(uniform_measure("circle", 1000), dirac("circle", 0.0)) == pytest.approx(0.25)


def test_half_split_circle():
    mu = DiscreteMeasure("circle", [0.0, 0.5], [0.5, 0.5])
    nu = DiscreteMeasure("circle", [0.25, 0.75], [0.5, 0.5])
    assert w1_distance(mu, nu) == pytest.approx(0.25)


def test_different_spaces_rejected():
    with pytest.raises(ValueError):
        w1_distance(dirac("circle", 0.1), dirac("unit_interval", 0.1))


@pytest.mark.parametrize("space", SPACES)
def test_matches_lp_oracle(space):
    rng = np.random.default_rng(11)
    for _ in range(40):
        a, b = random_measure(rng, space), random_measure(rng, space)
        assert abs(w1_distance(a, b) - lp_w1(a, b)) <= 1e-9


@pytest.mark.parametrize("space", ["unit_interval", "circle"])
def test_sorted_fast_path_matches_lp(space):
    rng = np.random.default_rng(5)
    a = DiscreteMeasure(space, rng.random(90))
    w = rng.random(70)
    b = DiscreteMeasure(space, rng.random(70), w / w.sum())
    assert abs(w1_distance(a, b) - lp_w1(a, b)) <= 1e-9


def test_uniform_equal_size_assignment_path():
    rng = np.random.default_rng(2)
    a = DiscreteMeasure("torus2", rng.random((9, 2)))
    b = DiscreteMeasure("torus2", rng.random((9, 2)))
    assert abs(w1_distance(a, b) - lp_w1(a, b)) <= 1e-9


def test_ssp_plan_marginals():
    rng = np.random.default_rng(4)
    C = rng.random((5, 7))
    a = rng.random(5)
    a /= a.sum()
    b = rng.random(7)
    b /= b.sum()
    value, plan = transport_ssp(C, a, b)
    assert np.allclose(plan.sum(axis=1), a)
    assert np.allclose(plan.sum(axis=0), b)
    assert value == pytest.approx(lp_transport(C, a, b), abs=1e-12)


def test_weighted_median_small_and_large_agree():
    rng = np.random.default_rng(0)
    v = rng.normal(size=6000)
    w = rng.random(6000)
    big = weighted_median(v, w)
    order = np.argsort(v)
    cum = np.cumsum(w[order])
    assert big == v[order][np.searchsorted(cum, 0.5 * cum[-1])]


def test_pairwise_symmetric_zero_diagonal():
    rng = np.random.default_rng(8)
    ms = [random_measure(rng, "circle") for _ in range(6)]
    D = pairwise_w1(ms)
    assert np.allclose(D, D.T)
    assert np.all(np.diag(D) == 0)
    R = pairwise_w1(ms[:2], ms)
    assert np.allclose(R, D[:2])


def test_pairwise_dirac_fast_path():
    ms = [dirac("square", p) for p in ([0, 0], [1, 1], [0.5, 0])]
    D = pairwise_w1(ms)
    assert D[0, 1] == pytest.approx(math.sqrt(2))
    assert D[0, 2] == pytest.approx(0.5)


measures = st.sampled_from(SPACES).flatmap(
    lambda s: st.tuples(*[st.integers(0, 2**32 - 1).map(lambda seed, s=s: random_measure(np.random.default_rng(seed), s)) for _ in range(3)])
)


@given(measures)
def test_metric_axioms(triple):
    a, b, c = triple
    ab, bc, ac = w1_distance(a, b), w1_distance(b, c), w1_distance(a, c)
    assert ab >= 0
    assert ab == pytest.approx(w1_distance(b, a), abs=1e-12)
    assert ac <= ab + bc + 1e-12
    assert ab <= a.space.diameter + 1e-12


@given(st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_circle_rotation_invariance(seed, shift):
    rng = np.random.default_rng(seed)
    a, b = random_measure(rng, "circle"), random_measure(rng, "circle")
    rot = lambda p: p + shift  # noqa: E731
    assert w1_distance(a.pushforward(rot), b.pushforward(rot)) == pytest.approx(w1_distance(a, b), abs=1e-9)
