"""Catalog of benchmark maps and orbit generation.

Expanding maps (``mul_k``, ``tent``) and the cat map act on dyadic rationals
by integer arithmetic, so their orbits are exact. ``logistic`` and
``standard_map`` orbits are double precision pseudo-orbits. Long
Lebesgue-typical orbits of ``mul_k`` and ``tent`` are generated from a random
digit sequence (see :func:`orbit_from_digits`) because any float start of
``x -> 2x mod 1`` is dyadic and reaches 0 after at most ~1075 steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit
from numpy.lib.stride_tricks import sliding_window_view

from .spaces import CIRCLE, SQUARE, TORUS2, UNIT_INTERVAL, DiscreteMeasure, PointSpace

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_FIXED_BITS = 53
_ONE = 1 << _FIXED_BITS
_CAT = ((2, 1), (1, 1))

KINDS = ("identity", "mul_k", "rotation", "tent", "logistic", "cat_map", "standard_map", "product")


@dataclass(frozen=True)
class DynamicalSystem:
    """A map of one of the catalog spaces to itself.

    ``params`` holds the numeric parameters (``k`` for ``mul_k``, ``alpha`` for
    ``rotation``, ``a`` for ``logistic``, ``K`` for ``standard_map``);
    ``components`` the two factors of a ``product``.
    """

    kind: str
    params: tuple = ()
    components: tuple = ()
    base_space: PointSpace | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown map {self.kind!r}")

    # -- description -----------------------------------------------------

    @property
    def space(self) -> PointSpace:
        if self.kind == "identity":
            return self.base_space or UNIT_INTERVAL
        if self.kind in ("mul_k", "rotation"):
            return CIRCLE
        if self.kind in ("tent", "logistic"):
            return UNIT_INTERVAL
        if self.kind in ("cat_map", "standard_map"):
            return TORUS2
        a, b = (c.space.kind for c in self.components)
        if a == b == "circle":
            return TORUS2
        return SQUARE

    @property
    def dim(self) -> int:
        return self.space.box_dimension

    @property
    def has_derivative(self) -> bool:
        return True

    @property
    def name(self) -> str:
        if self.kind == "mul_k":
            return f"mul_{self.params[0]}"
        if self.kind == "product":
            return "product(" + ",".join(c.name for c in self.components) + ")"
        if self.kind == "identity":
            return f"identity[{self.space.kind}]"
        if self.params:
            return f"{self.kind}({','.join(format(p, 'g') for p in self.params)})"
        return self.kind

    @property
    def exact(self) -> bool:
        """Whether orbits are computed in exact arithmetic."""
        if self.kind == "product":
            return all(c.exact for c in self.components)
        return self.kind in ("identity", "mul_k", "tent", "cat_map")

    def __str__(self):
        return self.name

    # -- one step, vectorised -----------------------------------------------

    def step(self, X: np.ndarray) -> np.ndarray:
        """Apply the map in floating point to an ``(N, dim)`` array."""
        X = np.asarray(X, dtype=float)
        k = self.kind
        if k == "identity":
            return X.copy()
        if k == "mul_k":
            y = self.params[0] * X
            return y - np.floor(y)
        if k == "rotation":
            y = X + self.params[0]
            return y - np.floor(y)
        if k == "tent":
            return np.where(X <= 0.5, 2.0 * X, 2.0 - 2.0 * X)
        if k == "logistic":
            a = self.params[0]
            return np.clip(a * X * (1.0 - X), 0.0, 1.0)
        if k == "cat_map":
            x, y = X[:, 0], X[:, 1]
            out = np.column_stack([2 * x + y, x + y])
            return out - np.floor(out)
        if k == "standard_map":
            K = self.params[0]
            th, p = X[:, 0], X[:, 1]
            p2 = p + K / (2 * math.pi) * np.sin(2 * math.pi * th)
            p2 -= np.floor(p2)
            th2 = th + p2
            th2 -= np.floor(th2)
            out = np.column_stack([th2, p2])
            out[out >= 1.0] = 0.0
            return out
        a, b = self.components
        return np.column_stack([a.step(X[:, :1]), b.step(X[:, 1:])])

    def derivative(self, X: np.ndarray) -> np.ndarray:
        """Derivative at each row: shape ``(N,)`` on 1D spaces, ``(N, 2, 2)`` on 2D."""
        X = np.asarray(X, dtype=float)
        N = len(X)
        k = self.kind
        if k == "identity":
            return np.ones(N) if self.dim == 1 else np.tile(np.eye(2), (N, 1, 1))
        if k == "mul_k":
            return np.full(N, float(self.params[0]))
        if k == "rotation":
            return np.ones(N)
        if k == "tent":
            return np.where(X[:, 0] <= 0.5, 2.0, -2.0)
        if k == "logistic":
            return self.params[0] * (1.0 - 2.0 * X[:, 0])
        if k == "cat_map":
            return np.tile(np.array(_CAT, dtype=float), (N, 1, 1))
        if k == "standard_map":
            c = self.params[0] * np.cos(2 * math.pi * X[:, 0])
            J = np.empty((N, 2, 2))
            J[:, 0, 0] = 1.0 + c
            J[:, 0, 1] = 1.0
            J[:, 1, 0] = c
            J[:, 1, 1] = 1.0
            return J
        a, b = self.components
        J = np.zeros((N, 2, 2))
        J[:, 0, 0] = a.derivative(X[:, :1])
        J[:, 1, 1] = b.derivative(X[:, 1:])
        return J

    # -- orbits ---------------------------------------------------------------

    def iterate(self, x, n: int):
        """``f^n(x)``; exact for ``mul_k``, ``tent`` and the cat map."""
        if n < 0:
            raise ValueError("n must be non-negative")
        k = self.kind
        if k == "identity" or n == 0:
            return _like(x, self.space.reduce(x)[0])
        if k == "product":
            a, b = self.components
            xa, xb = np.asarray(x, dtype=float)
            return np.array([a.iterate(float(xa), n), b.iterate(float(xb), n)])
        if k == "rotation":
            alpha = self.params[0]
            # fractional part of n*alpha first keeps the float sum small
            frac = math.fmod(n * alpha, 1.0)
            y = math.fsum([float(x), frac])
            return y - math.floor(y)
        if k == "mul_k":
            fx = Fraction(x)
            num, den = fx.numerator, fx.denominator
            return _out(x, Fraction(num * pow(self.params[0], n, den) % den, den))
        if k == "tent":
            fx = Fraction(x)
            num, den = fx.numerator, fx.denominator
            for _ in range(n):
                num = 2 * num if 2 * num <= den else 2 * den - 2 * num
                if num == 0:
                    break
            return _out(x, Fraction(num, den))
        if k == "cat_map":
            fx, fy = (Fraction(v) for v in x)
            den = math.lcm(fx.denominator, fy.denominator)
            p, q = fx.numerator * (den // fx.denominator), fy.numerator * (den // fy.denominator)
            M = _matpow(_CAT, n, den)
            p2 = (M[0][0] * p + M[0][1] * q) % den
            q2 = (M[1][0] * p + M[1][1] * q) % den
            return np.array([p2 / den, q2 / den])
        last = self.orbit(x, n + 1)[-1]
        return float(last[0]) if self.dim == 1 else last

    def orbit(self, x, n: int) -> np.ndarray:
        """The first ``n`` orbit points ``x, f(x), ..., f^{n-1}(x)`` as ``(n, dim)``."""
        if n < 1:
            raise ValueError("n must be at least 1")
        k = self.kind
        x0 = self.space.reduce(x)
        if k == "identity":
            return np.repeat(x0, n, axis=0)
        if k == "rotation":
            steps = np.arange(n, dtype=float) * self.params[0]
            y = x0[0, 0] + (steps - np.floor(steps))
            return (y - np.floor(y)).reshape(-1, 1)
        if k in ("mul_k", "tent"):
            return _exact_orbit_1d(self, Fraction(float(x0[0, 0])), n).reshape(-1, 1)
        if k == "cat_map":
            return _exact_orbit_cat(Fraction(float(x0[0, 0])), Fraction(float(x0[0, 1])), n)
        if k == "product":
            a, b = self.components
            return np.column_stack([a.orbit(x0[0, 0], n)[:, 0], b.orbit(x0[0, 1], n)[:, 0]])
        if k == "logistic":
            return _logistic_orbit(float(x0[0, 0]), self.params[0], n).reshape(-1, 1)
        return _standard_orbit(float(x0[0, 0]), float(x0[0, 1]), self.params[0], n)

    def orbits(self, X, n: int) -> np.ndarray:
        """Orbits of many starts at once, shape ``(N, n, dim)``.

        Exact maps run on the 2^-53 fixed-point grid (starts are rounded to
        it), which is exact for at least the first ~50 steps of ``mul_2``.
        """
        X = self.space.reduce(X)
        N = len(X)
        out = np.empty((N, n, self.dim))
        k = self.kind
        if k == "product":
            a, b = self.components
            out[:, :, :1] = a.orbits(X[:, :1], n)
            out[:, :, 1:] = b.orbits(X[:, 1:], n)
            return out
        if k in ("mul_k", "tent", "cat_map"):
            P = np.rint(X * _ONE).astype(np.int64)
            for i in range(n):
                out[:, i, :] = P / _ONE
                P = _fixed_step(self, P)
            return out
        if k == "rotation":
            steps = np.arange(n, dtype=float) * self.params[0]
            y = X[:, :1] + (steps - np.floor(steps))[None, :]
            out[:, :, 0] = y - np.floor(y)
            return out
        cur = X
        for i in range(n):
            out[:, i, :] = cur
            cur = self.step(cur)
        return out


@njit(cache=True)
def _logistic_orbit(x, a, n):
    out = np.empty(n)
    for i in range(n):
        out[i] = x
        x = min(max(a * x * (1.0 - x), 0.0), 1.0)
    return out


@njit(cache=True)
def _standard_orbit(th, p, K, n):
    out = np.empty((n, 2))
    c = K / (2 * math.pi)
    for i in range(n):
        out[i, 0] = th
        out[i, 1] = p
        p = p + c * math.sin(2 * math.pi * th)
        p -= math.floor(p)
        if p >= 1.0:
            p = 0.0
        th = th + p
        th -= math.floor(th)
        if th >= 1.0:
            th = 0.0
    return out


def _like(x, value):
    return float(value[0]) if np.ndim(x) == 0 or len(np.atleast_1d(x)) == 1 and value.shape == (1,) else value


def _out(x, frac: Fraction):
    return frac if isinstance(x, Fraction) else float(frac)


def _matpow(M, n, mod):
    R = ((1, 0), (0, 1))
    B = M
    while n:
        if n & 1:
            R = _matmul(R, B, mod)
        B = _matmul(B, B, mod)
        n >>= 1
    return R


def _matmul(A, B, mod):
    return (
        ((A[0][0] * B[0][0] + A[0][1] * B[1][0]) % mod, (A[0][0] * B[0][1] + A[0][1] * B[1][1]) % mod),
        ((A[1][0] * B[0][0] + A[1][1] * B[1][0]) % mod, (A[1][0] * B[0][1] + A[1][1] * B[1][1]) % mod),
    )


def _exact_orbit_1d(sys: DynamicalSystem, x: Fraction, n: int) -> np.ndarray:
    num, den = x.numerator, x.denominator
    out = np.empty(n)
    if sys.kind == "mul_k":
        k = sys.params[0]
        for i in range(n):
            out[i] = num / den
            num = (k * num) % den
    else:
        for i in range(n):
            out[i] = num / den
            num = 2 * num if 2 * num <= den else 2 * den - 2 * num
    return out


def _exact_orbit_cat(x: Fraction, y: Fraction, n: int) -> np.ndarray:
    den = math.lcm(x.denominator, y.denominator)
    p, q = x.numerator * (den // x.denominator), y.numerator * (den // y.denominator)
    out = np.empty((n, 2))
    for i in range(n):
        out[i] = (p / den, q / den)
        p, q = (2 * p + q) % den, (p + q) % den
    return out


def _fixed_step(sys: DynamicalSystem, P: np.ndarray) -> np.ndarray:
    if sys.kind == "mul_k":
        return (sys.params[0] * P) % _ONE
    if sys.kind == "tent":
        return np.where(2 * P <= _ONE, 2 * P, 2 * _ONE - 2 * P)
    p, q = P[:, 0], P[:, 1]
    return np.column_stack([(2 * p + q) % _ONE, (p + q) % _ONE])


def digit_window(k: int) -> int:
    """Number of base-k digits that pin a point to double precision."""
    return int(math.ceil(_FIXED_BITS / math.log2(k))) + 1


def orbit_from_digits(sys: DynamicalSystem, digits: np.ndarray, n: int) -> np.ndarray:
    """Exact orbit of the point with base-k expansion ``0.d1 d2 d3 ...``.

    For ``mul_k`` the k-th iterate is the shifted expansion; for ``tent``
    (base 2) it is the shifted expansion with every bit flipped when the
    preceding bit is 1. ``digits`` needs ``n + digit_window(k) - 1`` entries.
    """
    if sys.kind == "mul_k":
        base = sys.params[0]
    elif sys.kind == "tent":
        base = 2
    else:
        raise ValueError("digit orbits exist for mul_k and tent only")
    W = digit_window(base)
    digits = np.asarray(digits, dtype=np.int64)
    if len(digits) < n + W - 1:
        raise ValueError(f"need {n + W - 1} digits for {n} orbit points")
    win = sliding_window_view(digits, W)[:n]
    if sys.kind == "tent":
        prev = np.concatenate([[0], digits[: n - 1]])
        win = win ^ prev[:, None]
    scale = float(base) ** -np.arange(1, W + 1)
    return win @ scale


# -- catalog constructors --------------------------------------------------


def identity(space="unit_interval") -> DynamicalSystem:
    return DynamicalSystem("identity", base_space=PointSpace(str(space)))


def mul_k(k: int = 2) -> DynamicalSystem:
    if int(k) != k or k < 2:
        raise ValueError("mul_k needs an integer k >= 2")
    return DynamicalSystem("mul_k", (int(k),))


def rotation(alpha: float = GOLDEN) -> DynamicalSystem:
    return DynamicalSystem("rotation", (float(alpha),))


def tent() -> DynamicalSystem:
    return DynamicalSystem("tent")


def logistic(a: float = 4.0) -> DynamicalSystem:
    if not 0 <= a <= 4:
        raise ValueError("logistic parameter must lie in [0, 4]")
    return DynamicalSystem("logistic", (float(a),))


def cat_map() -> DynamicalSystem:
    return DynamicalSystem("cat_map")


def standard_map(K: float = 1.2) -> DynamicalSystem:
    return DynamicalSystem("standard_map", (float(K),))


def product(a: DynamicalSystem, b: DynamicalSystem) -> DynamicalSystem:
    kinds = {a.space.kind, b.space.kind}
    if a.dim != 1 or b.dim != 1 or len(kinds) != 1:
        raise ValueError("product needs two 1D systems on the same kind of space")
    return DynamicalSystem("product", components=(a, b))


def catalog() -> dict[str, DynamicalSystem]:
    """The benchmark systems used throughout the experiments."""
    systems = [
        identity("unit_interval"),
        mul_k(2),
        mul_k(3),
        rotation(),
        tent(),
        logistic(4.0),
        cat_map(),
        standard_map(1.2),
        product(mul_k(2), rotation()),
    ]
    return {s.name: s for s in systems}


def empirical_measure(sys: DynamicalSystem, x, n: int) -> DiscreteMeasure:
    """Uniform measure on the first ``n`` orbit points of ``x``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return DiscreteMeasure(sys.space, sys.orbit(x, n))


def bowen_distance(sys: DynamicalSystem, x, y, n: int) -> float:
    """``max_{0 <= i < n} d(f^i x, f^i y)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    ox, oy = sys.orbit(x, n), sys.orbit(y, n)
    return float(np.max(sys.space.distance(ox, oy)))


def conjugacy_tent_logistic(x):
    """``h(x) = sin^2(pi x / 2)`` maps tent orbits onto logistic(4) orbits."""
    return np.sin(np.pi * np.asarray(x) / 2.0) ** 2
