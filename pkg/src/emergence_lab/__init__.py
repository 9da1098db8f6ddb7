"""Numerical estimates of entropy, Lyapunov exponents and emergence for
benchmark dynamical systems."""

from .cloud import EmpiricalCloud, cloud_from_measures, coarse_cloud, quadrature_cloud, sample_cloud
from .covering import CoveringBounds, measure_space_covering_bounds
from .dynamics import (
    DynamicalSystem,
    bowen_distance,
    cat_map,
    catalog,
    empirical_measure,
    identity,
    logistic,
    mul_k,
    product,
    rotation,
    standard_map,
    tent,
)
from .emergence import (
    EmergenceCurve,
    EmergenceResult,
    emergence_curve,
    exact_emergence,
    local_emergence_order,
    metric_emergence,
    periodic_measure_packing,
    topological_emergence_lower,
)
from .entropy import EntropyEstimate, katok_entropy, local_dimension, topological_entropy
from .estimators import EmergenceEstimator, EntropyEstimator, LyapunovEstimator, MeasureQuantizer
from .lyapunov import LyapunovSpectrum, RuelleReport, lyapunov, ruelle_check
from .periodic import PeriodicPoints, periodic_count, periodic_points
from .quantization import Quantization, kmedoids, quantization_number, quantize_best
from .scaling import OrderEstimate, growth_exponent, order_of
from .spaces import DiscreteMeasure, PointSpace, coarse_grain, dirac, measure_from_csv, measure_to_csv, uniform_measure
from .transport import pairwise_w1, w1_distance

__version__ = "0.1.0"
