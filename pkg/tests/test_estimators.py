import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from emergence_lab import (
    EmergenceEstimator,
    EntropyEstimator,
    LyapunovEstimator,
    MeasureQuantizer,
    cat_map,
    dirac,
    mul_k,
    rotation,
    sample_cloud,
)


def test_params_roundtrip_and_clone():
    q = MeasureQuantizer(n_atoms=3, seed=5)
    assert q.get_params() == {"space": "unit_interval", "n_atoms": 3, "eps": None, "seed": 5}
    q.set_params(n_atoms=4)
    c = clone(q)
    assert c.n_atoms == 4 and c is not q
    assert clone(EmergenceEstimator(eps_grid=(0.3, 0.1))).eps_grid == (0.3, 0.1)
    assert EntropyEstimator(kind="katok").get_params()["kind"] == "katok"
    assert LyapunovEstimator(n=5000).get_params()["n"] == 5000


@pytest.mark.parametrize("est,method,arg", [
    (MeasureQuantizer(), "transform", [[0.1]]),
    (MeasureQuantizer(), "predict", [[0.1]]),
    (EmergenceEstimator(), "predict", [dirac("circle", 0.1)]),
])
def test_not_fitted(est, method, arg):
    with pytest.raises(NotFittedError):
        getattr(est, method)(arg)


def test_quantizer_two_clusters():
    X = np.r_[np.full(10, 0.1), np.full(10, 0.9)][:, None]
    q = MeasureQuantizer(n_atoms=2).fit(X)
    assert sorted(q.cluster_centers_.ravel().tolist()) == pytest.approx([0.1, 0.9])
    assert q.error_ == pytest.approx(0.0, abs=1e-12)
    assert q.transform(X).shape == (20, 2)
    labels = q.predict(X)
    assert labels.shape == (20,) and len(set(labels[:10])) == 1 and labels[0] != labels[-1]


def test_quantizer_eps_mode_uniform():
    X = ((np.arange(100) + 0.5) / 100)[:, None]
    q = MeasureQuantizer(eps=0.045).fit(X)
    # k equal blocks of the grid give W1 = 1/(4k): 0.05 for k=5, 0.0416 for k=6
    assert q.n_atoms_ == 6 and q.error_ < 0.045


def test_quantizer_validation():
    with pytest.raises(ValueError):
        MeasureQuantizer().fit([[1.5]])
    with pytest.raises(ValueError):
        MeasureQuantizer().fit([[0.2], [0.4]], sample_weight=[1.0, -1.0])
    with pytest.raises(ValueError):
        MeasureQuantizer(n_atoms=0).fit([[0.2]])
    with pytest.raises(ValueError):
        MeasureQuantizer(space="sphere").fit([[0.2]])
    with pytest.raises(ValueError):
        MeasureQuantizer(eps=-1).fit([[0.2]])


def test_emergence_estimator_on_measures():
    ms = [dirac("circle", x) for x in (np.arange(40) + 0.5) / 40]
    est = EmergenceEstimator(eps_grid=(0.2, 0.1, 0.05)).fit(ms)
    assert est.n_upper_.tolist() == sorted(est.n_upper_.tolist())
    assert np.all(est.n_lower_ <= est.n_upper_)
    assert len(est.centers_) == est.n_upper_[-1]
    D = est.transform(ms[:3])
    assert D.shape == (3, len(est.centers_))
    assert est.predict(ms[:3]).shape == (3,)
    assert 0.5 < est.growth_exponent_ < 1.5


def test_emergence_estimator_validation():
    with pytest.raises(ValueError):
        EmergenceEstimator(eps_grid=(0.1, 0.2)).fit([dirac("circle", 0.1)])
    with pytest.raises(ValueError):
        EmergenceEstimator().fit([dirac("circle", 0.1), dirac("unit_interval", 0.1)])
    with pytest.raises((TypeError, ValueError)):
        EmergenceEstimator().fit("not a cloud")


def test_emergence_estimator_accepts_cloud():
    cloud = sample_cloud(mul_k(2), 10, 20_000, seed=1)
    est = EmergenceEstimator(eps_grid=(0.2, 0.1)).fit(cloud)
    assert est.n_upper_.tolist() == [1, 1]


def test_entropy_estimator():
    est = EntropyEstimator().fit(mul_k(2))
    assert abs(est.entropy_ - math.log(2)) < 0.15
    with pytest.raises(ValueError):
        EntropyEstimator(kind="metric").fit(mul_k(2))
    with pytest.raises((TypeError, ValueError)):
        EntropyEstimator().fit([0.1, 0.2])


def test_lyapunov_estimator():
    est = LyapunovEstimator(n=20_000).fit(mul_k(2))
    assert est.exponents_[0] == pytest.approx(math.log(2), abs=1e-12)
    cat = LyapunovEstimator(n=20_000).fit(cat_map())
    assert cat.sum_positive_ == pytest.approx(math.log((3 + math.sqrt(5)) / 2), abs=1e-6)
    assert LyapunovEstimator(n=5000).fit(rotation()).sum_positive_ == 0.0
    with pytest.raises(ValueError):
        LyapunovEstimator(n=10).fit(mul_k(2))
