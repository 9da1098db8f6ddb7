"""Order functional: growth rate of log log phi(eps) against -log eps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MIN_SCALES = 3


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    stderr: float
    residual: float  # root mean square


def linear_fit(x, y) -> LinearFit:
    """Ordinary least squares ``y ~ slope * x + intercept``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if n < 2:
        raise ValueError("need at least two points")
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0:
        raise ValueError("x values are all equal")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    res = y - (slope * x + intercept)
    sse = float(np.sum(res**2))
    stderr = math.sqrt(sse / (n - 2) / sxx) if n > 2 else 0.0
    return LinearFit(slope, intercept, stderr, math.sqrt(sse / n))


@dataclass(frozen=True)
class OrderEstimate:
    """Regression estimate of the order of a function of the scale eps.

    ``points`` are ``(-log eps, log log phi(eps))`` pairs actually used;
    ``quotients`` the per-point ratios log log phi / -log eps, kept so a reader
    can inspect the finite-grid behaviour the slope summarises.
    """

    slope: float
    intercept: float
    stderr: float
    points: tuple
    quotients: tuple
    usable_scale_count: int
    flags: tuple = field(default=())

    @property
    def ok(self) -> bool:
        return not self.flags


def order_from_loglog(neg_log_eps, loglog_values, dropped=0) -> OrderEstimate:
    x = np.asarray(neg_log_eps, dtype=float)
    y = np.asarray(loglog_values, dtype=float)
    flags = []
    if dropped:
        flags.append(f"dropped_{dropped}_scales_with_value_le_1")
    pts = tuple(zip(x.tolist(), y.tolist()))
    quot = tuple((yy / xx if xx != 0 else math.nan) for xx, yy in pts)
    if len(x) < MIN_SCALES:
        flags.append("too_few_scales")
        return OrderEstimate(math.nan, math.nan, math.nan, pts, quot, len(x), tuple(flags))
    fit = linear_fit(x, y)
    order = np.argsort(x)
    if np.all(np.diff(y[order]) <= 0):
        # phi does not grow as eps shrinks
        flags.append("bounded")
    return OrderEstimate(fit.slope, fit.intercept, fit.stderr, pts, quot, len(x), tuple(flags))


def order_of(samples, log_values: bool = False) -> OrderEstimate:
    """Order estimate from ``(eps, phi(eps))`` samples.

    Values ``<= 1`` have no log log and are dropped with a flag. With
    ``log_values=True`` the second entries are ``log phi(eps)`` instead, which
    avoids overflow for doubly exponential inputs.
    """
    xs, ys, dropped = [], [], 0
    for eps, value in samples:
        if not eps > 0:
            raise ValueError("scales must be positive")
        lv = float(value) if log_values else (math.log(value) if value > 0 else -math.inf)
        if not lv > 0:
            dropped += 1
            continue
        xs.append(-math.log(eps))
        ys.append(math.log(lv))
    return order_from_loglog(xs, ys, dropped)


def growth_exponent(samples) -> LinearFit:
    """Slope of log phi against -log eps (polynomial growth exponent)."""
    x = [-math.log(e) for e, _ in samples]
    y = [math.log(v) for _, v in samples]
    return linear_fit(x, y)
