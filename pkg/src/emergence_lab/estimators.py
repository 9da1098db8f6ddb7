"""Estimator classes with the scikit-learn interface.

Each class keeps its constructor arguments as plain attributes (so
``get_params`` / ``set_params`` / ``clone`` work) and stores fitted results
in attributes with a trailing underscore.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import _validation as v
from .emergence import emergence_curve
from .entropy import default_entropy_settings, katok_entropy, topological_entropy
from .lyapunov import lyapunov
from .quantization import quantize_best, quantization_number
from .scaling import growth_exponent, order_of
from .spaces import DiscreteMeasure
from .transport import pairwise_w1


class MeasureQuantizer(TransformerMixin, BaseEstimator):
    """Best W1 approximation of a weighted point sample by few Dirac masses.

    With ``eps`` set, the number of atoms is the quantization number at eps;
    otherwise ``n_atoms`` atoms are used. ``transform`` gives distances to the
    atoms, ``predict`` the index of the nearest atom.
    """

    def __init__(self, space="unit_interval", n_atoms=2, eps=None, seed=0):
        self.space = space
        self.n_atoms = n_atoms
        self.eps = eps
        self.seed = seed

    def fit(self, X, y=None, sample_weight=None):
        space = v.check_space(self.space)
        X = v.check_points(X, space)
        w = v.check_weights(sample_weight, len(X))
        mu = DiscreteMeasure(space, X, w)
        if self.eps is not None:
            k = quantization_number(mu, v.check_positive(self.eps, "eps"), self.seed)
        else:
            k = v.check_count(self.n_atoms, "n_atoms")
        q = quantize_best(mu, k, self.seed)
        self.measure_ = mu
        self.quantization_ = q
        self.cluster_centers_ = np.array(q.measure.points)
        self.cluster_weights_ = np.array(q.measure.weights)
        self.error_ = q.error
        self.exact_ = q.exact
        self.n_atoms_ = len(q.measure)
        return self

    def transform(self, X):
        check_is_fitted(self, "cluster_centers_")
        space = v.check_space(self.space)
        X = v.check_points(X, space)
        return space.cost_matrix(X, self.cluster_centers_)

    def predict(self, X):
        return np.argmin(self.transform(X), axis=1)


class EmergenceEstimator(BaseEstimator):
    """Metric-emergence curve of a cloud of measures over an eps grid.

    ``fit`` accepts an EmpiricalCloud or a sequence of DiscreteMeasure
    (optionally weighted). ``predict`` maps each measure to its nearest
    medoid at the finest scale; ``transform`` gives W1 distances to those
    medoids.
    """

    def __init__(self, eps_grid=(0.2, 0.1, 0.05, 0.025), restarts=10, seed=0):
        self.eps_grid = eps_grid
        self.restarts = restarts
        self.seed = seed

    def fit(self, X, y=None, sample_weight=None):
        cloud = v.check_cloud(X, sample_weight)
        grid = v.check_eps_grid(self.eps_grid)
        curve = emergence_curve(cloud, grid, v.check_count(self.restarts, "restarts"), self.seed)
        self.cloud_ = cloud
        self.curve_ = curve
        self.n_upper_ = np.array(curve.column("N_upper"))
        self.n_lower_ = np.array(curve.column("N_lower"))
        self.centers_ = [cloud.members[i] for i in curve.records[-1].centers]
        samples = list(zip(grid, self.n_upper_.tolist()))
        self.order_ = order_of(samples)
        self.growth_exponent_ = growth_exponent(samples).slope if len(grid) > 1 else np.nan
        return self

    def transform(self, X):
        check_is_fitted(self, "centers_")
        return pairwise_w1(v.check_measures(X), self.centers_)

    def predict(self, X):
        return np.argmin(self.transform(X), axis=1)


class EntropyEstimator(BaseEstimator):
    """Topological or Katok entropy of a DynamicalSystem.

    Unset grids fall back to the tuned defaults for the system.
    """

    def __init__(self, kind="topological", eps=None, n_grid=None, sample_size=None, delta=0.1, reference="uniform", seed=0):
        self.kind = kind
        self.eps = eps
        self.n_grid = n_grid
        self.sample_size = sample_size
        self.delta = delta
        self.reference = reference
        self.seed = seed

    def fit(self, X, y=None):
        sys = v.check_system(X)
        st = default_entropy_settings(sys)
        if self.kind == "topological":
            eps = st["top_eps"] if self.eps is None else self.eps
            n_grid = st["top_n"] if self.n_grid is None else self.n_grid
            size = st["budget"] if self.sample_size is None else self.sample_size
            est = topological_entropy(sys, eps, n_grid, v.check_count(size, "sample_size"), self.seed)
        elif self.kind == "katok":
            eps = st["katok_eps"] if self.eps is None else self.eps
            n_grid = st["katok_n"] if self.n_grid is None else self.n_grid
            size = st["katok_samples"] if self.sample_size is None else self.sample_size
            est = katok_entropy(sys, self.reference, eps, v.check_unit_open(self.delta, "delta"), n_grid, size, self.seed)
        else:
            raise ValueError(f"kind must be 'topological' or 'katok', got {self.kind!r}")
        self.estimate_ = est
        self.entropy_ = est.value
        self.flags_ = est.flags
        return self


class LyapunovEstimator(BaseEstimator):
    """Lyapunov spectrum along the orbit of ``start`` (fit takes the system)."""

    def __init__(self, start=0.1234, n=100_000, renorm=10):
        self.start = start
        self.n = n
        self.renorm = renorm

    def fit(self, X, y=None):
        sys = v.check_system(X)
        start = self.start
        if sys.dim == 2 and np.ndim(start) == 0:
            start = (start, start)
        spec = lyapunov(sys, start, v.check_count(self.n, "n", 1000), v.check_count(self.renorm, "renorm"))
        self.spectrum_ = spec
        self.exponents_ = np.array(spec.exponents)
        self.sum_positive_ = spec.sum_positive
        return self
