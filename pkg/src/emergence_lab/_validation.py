"""Argument checks shared by the estimator classes and the CLI."""

from __future__ import annotations

import math

import numpy as np

from .cloud import EmpiricalCloud, cloud_from_measures
from .dynamics import DynamicalSystem
from .spaces import DiscreteMeasure, PointSpace, as_space


def check_positive(value, name: str) -> float:
    value = float(value)
    if not value > 0 or not math.isfinite(value):
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return value


def check_unit_open(value, name: str) -> float:
    value = float(value)
    if not 0 < value < 1:
        raise ValueError(f"{name} must lie in (0, 1), got {value!r}")
    return value


def check_count(value, name: str, minimum: int = 1) -> int:
    if int(value) != value or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_eps_grid(grid, decreasing: bool = True) -> tuple:
    vals = tuple(check_positive(e, "eps") for e in np.atleast_1d(grid))
    if not vals:
        raise ValueError("eps grid is empty")
    if decreasing and any(b >= a for a, b in zip(vals, vals[1:])):
        raise ValueError("eps grid must be strictly decreasing")
    return vals


def check_points(X, space) -> np.ndarray:
    """Points as an ``(n, dim)`` array inside ``space``."""
    space = as_space(space)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and space.box_dimension == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2 or X.shape[1] != space.box_dimension:
        raise ValueError(f"expected points of shape (n, {space.box_dimension}), got {X.shape}")
    if len(X) == 0:
        raise ValueError("no points given")
    return space.reduce(X)


def check_weights(weights, n: int) -> np.ndarray:
    if weights is None:
        return np.full(n, 1.0 / n)
    w = np.asarray(weights, dtype=float).reshape(-1)
    if len(w) != n:
        raise ValueError(f"{n} samples but {len(w)} weights")
    if np.any(w < 0) or not np.all(np.isfinite(w)) or w.sum() <= 0:
        raise ValueError("sample weights must be non-negative, finite and not all zero")
    return w / w.sum()


def check_measure(mu) -> DiscreteMeasure:
    if not isinstance(mu, DiscreteMeasure):
        raise TypeError(f"expected a DiscreteMeasure, got {type(mu).__name__}")
    return mu


def check_measures(measures) -> list:
    measures = [check_measure(m) for m in measures]
    if not measures:
        raise ValueError("no measures given")
    space = measures[0].space
    if any(m.space != space for m in measures):
        raise ValueError("measures live on different spaces")
    return measures


def check_cloud(X, sample_weight=None) -> EmpiricalCloud:
    """An EmpiricalCloud, or a sequence of measures wrapped as one."""
    if isinstance(X, EmpiricalCloud):
        if sample_weight is not None:
            raise ValueError("an EmpiricalCloud carries its own member weights")
        return X
    measures = check_measures(X)
    return cloud_from_measures(measures, check_weights(sample_weight, len(measures)))


def check_system(sys) -> DynamicalSystem:
    if not isinstance(sys, DynamicalSystem):
        raise TypeError(f"expected a DynamicalSystem, got {type(sys).__name__}")
    return sys


def check_space(space) -> PointSpace:
    return as_space(space)
