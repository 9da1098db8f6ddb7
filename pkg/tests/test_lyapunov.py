import math
import numpy as np
import pytest

from emergence_lab.dynamics import cat_map, identity, logistic, mul_k, product, rotation, standard_map, tent
from emergence_lab.lyapunov import lyapunov, ruelle_check, spectrum_from_orbit

LOG2 = math.log(2)
CAT = math.log((3 + math.sqrt(5)) / 2)


def test_mul2_exact():
    assert lyapunov(mul_k(2), 0.1234, 5000).exponents == (LOG2,)


def test_tent_exact_abs_derivative():
    assert lyapunov(tent(), 0.1234, 2000).exponents[0] == LOG2


def test_isometries_zero():
    assert lyapunov(rotation(), 0.2, 1000).sum_positive == 0.0
    assert lyapunov(identity(), 0.2, 1000).exponents == (0.0,)


def test_cat_exponents():
    ex = lyapunov(cat_map(), (0.1, 0.3), 5000).exponents
    assert ex[0] == pytest.approx(CAT, abs=1e-6)
    assert ex[1] == pytest.approx(-CAT, abs=1e-6)


def test_product_spectrum():
    spec = lyapunov(product(mul_k(2), rotation()), (0.1, 0.2), 3000)
    assert spec.exponents[0] == pytest.approx(LOG2, abs=1e-9)
    assert spec.exponents[1] == pytest.approx(0.0, abs=1e-9)


def test_standard_map_volume_preserving():
    spec = lyapunov(standard_map(1.2), (0.3, 0.1), 20_000)
    assert sum(spec.exponents) == pytest.approx(0.0, abs=1e-6)


def test_logistic_close_to_log2():
    assert lyapunov(logistic(4.0), 0.1234, 100_000).exponents[0] == pytest.approx(LOG2, abs=0.02)


def test_short_orbit_rejected():
    with pytest.raises(ValueError):
        lyapunov(mul_k(2), 0.1, 10)


def test_vanishing_derivative_warns():
    sys = logistic(4.0)
    orbit = np.vstack([[[0.5]], sys.orbit(0.3, 999)])
    with pytest.warns(RuntimeWarning):
        spec = spectrum_from_orbit(sys, orbit)
    assert spec.skipped == 1


def test_log_norm_bounds():
    spec = lyapunov(cat_map(), (0.2, 0.7), 2000)
    # the largest singular value of the cat matrix is its largest eigenvalue (symmetric)
    assert spec.log_norm_plus == pytest.approx(CAT, abs=1e-12)


def test_ruelle_mul2_and_rotation():
    r = ruelle_check(mul_k(2), entropy=LOG2, n=2000, starts=4)
    assert r.passed and r.sum_positive == LOG2
    assert r.triple() == (LOG2, LOG2, LOG2)
    r = ruelle_check(rotation(), entropy=0.0, n=2000, starts=4)
    assert r.passed and r.derivative_bound == 0.0


def test_ruelle_fails_when_entropy_too_large():
    assert not ruelle_check(mul_k(2), entropy=1.0, n=2000, starts=2).passed


def test_ruelle_non_ergodic_flag_on_mixed_phase_space():
    r = ruelle_check(standard_map(1.2), entropy=0.1, n=20_000, starts=16)
    assert "non_ergodic_reference" in r.flags
    assert r.sum_positive_max > r.sum_positive
