"""Compact metric spaces and finitely supported probability measures."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

NORMALIZATION_TOL = 1e-12

_KINDS = ("unit_interval", "circle", "square", "torus2")


@dataclass(frozen=True)
class PointSpace:
    """One of four compact model spaces.

    ``unit_interval`` and ``square`` carry the Euclidean metric, ``circle``
    (R/Z) and ``torus2`` ((R/Z)^2) the quotient metric.
    """

    kind: str

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown space kind {self.kind!r}; expected one of {_KINDS}")

    @property
    def box_dimension(self) -> int:
        return 1 if self.kind in ("unit_interval", "circle") else 2

    @property
    def periodic(self) -> bool:
        return self.kind in ("circle", "torus2")

    @property
    def diameter(self) -> float:
        return {
            "unit_interval": 1.0,
            "circle": 0.5,
            "square": math.sqrt(2.0),
            "torus2": math.sqrt(2.0) / 2.0,
        }[self.kind]

    def reduce(self, points) -> np.ndarray:
        """Return ``points`` as an ``(k, dim)`` float array inside the space."""
        pts = np.asarray(points, dtype=float)
        d = self.box_dimension
        if pts.ndim == 0:
            pts = pts.reshape(1, 1)
        elif pts.ndim == 1:
            pts = pts.reshape(-1, 1) if d == 1 else pts.reshape(-1, d)
        if pts.shape[1] != d:
            raise ValueError(f"points of dimension {pts.shape[1]} do not fit {self.kind}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("non-finite coordinates")
        if self.periodic:
            pts = pts - np.floor(pts)
            # x - floor(x) can round up to exactly 1.0 for tiny negative x
            pts[pts >= 1.0] = 0.0
        else:
            lo, hi = pts.min(), pts.max()
            if lo < -1e-12 or hi > 1.0 + 1e-12:
                raise ValueError(f"points outside {self.kind}")
            pts = np.clip(pts, 0.0, 1.0)
        return pts

    def distance(self, x, y) -> np.ndarray | float:
        """Distance between points; broadcasts over leading axes."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        diff = np.abs(x - y)
        if self.periodic:
            diff = np.minimum(diff, 1.0 - diff)
        if self.box_dimension == 1:
            if diff.ndim and diff.shape[-1] == 1:
                diff = diff[..., 0]
            return diff
        return np.sqrt(np.sum(diff * diff, axis=-1))

    def cost_matrix(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Pairwise distances between the rows of ``a`` and ``b``."""
        a = np.asarray(a, dtype=float).reshape(len(a), -1)
        b = np.asarray(b, dtype=float).reshape(len(b), -1)
        return self.distance(a[:, None, :], b[None, :, :])

    def __str__(self):
        return self.kind


UNIT_INTERVAL = PointSpace("unit_interval")
CIRCLE = PointSpace("circle")
SQUARE = PointSpace("square")
TORUS2 = PointSpace("torus2")


def as_space(space) -> PointSpace:
    return space if isinstance(space, PointSpace) else PointSpace(str(space))


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finitely supported probability measure in canonical form.

    Atoms are reduced into the space, sorted lexicographically, and exact
    duplicates are merged. Zero-weight atoms are dropped. Arrays are
    read-only after construction.
    """

    space: PointSpace
    points: np.ndarray
    weights: np.ndarray
    _key: bytes = field(init=False, repr=False, compare=False)

    def __init__(self, space, points, weights=None):
        space = as_space(space)
        pts = space.reduce(points)
        if weights is None:
            w = np.full(len(pts), 1.0 / len(pts))
        else:
            w = np.asarray(weights, dtype=float).reshape(-1)
        if len(w) != len(pts):
            raise ValueError(f"{len(pts)} atoms but {len(w)} weights")
        if len(pts) == 0:
            raise ValueError("a probability measure needs at least one atom")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        if abs(math.fsum(w) - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"weights sum to {math.fsum(w)!r}, not 1")

        keep = w > 0
        pts, w = pts[keep], w[keep]
        order = np.lexsort(pts.T[::-1])
        pts, w = pts[order], w[order]
        if len(pts) > 1:
            new = np.empty(len(pts), dtype=bool)
            new[0] = True
            new[1:] = np.any(pts[1:] != pts[:-1], axis=1)
            if not new.all():
                group = np.cumsum(new) - 1
                w = np.bincount(group, weights=w)
                pts = pts[new]
        pts = np.ascontiguousarray(pts)
        w = np.ascontiguousarray(w)
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "_key", pts.tobytes() + w.tobytes())

    def __len__(self):
        return len(self.weights)

    def __eq__(self, other):
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return self.space == other.space and self._key == other._key

    def __hash__(self):
        return hash((self.space.kind, self._key))

    def __repr__(self):
        return f"DiscreteMeasure({self.space.kind}, {len(self)} atoms)"

    @property
    def is_dirac(self) -> bool:
        return len(self.weights) == 1

    @property
    def coords(self) -> np.ndarray:
        """Atoms as a flat array on 1D spaces, ``(k, 2)`` otherwise."""
        return self.points[:, 0] if self.space.box_dimension == 1 else self.points

    def pushforward(self, func) -> "DiscreteMeasure":
        """Image measure under a vectorised point map (same space)."""
        return DiscreteMeasure(self.space, func(self.points), self.weights)

    def to_csv(self, path=None) -> str:
        text = measure_to_csv(self)
        if path is not None:
            Path(path).write_text(text)
        return text


def dirac(space, point) -> DiscreteMeasure:
    return DiscreteMeasure(space, [point] if np.ndim(point) else [[point]], [1.0])


def uniform_measure(space, size: int = 10_000) -> DiscreteMeasure:
    """Fine uniform discretisation of Lebesgue measure.

    On 1D spaces this is the midpoint grid ``(2i+1)/(2 size)``; on 2D spaces a
    ``m x m`` midpoint grid with ``m = round(sqrt(size))``.
    """
    space = as_space(space)
    if space.box_dimension == 1:
        pts = (2 * np.arange(size) + 1) / (2.0 * size)
        return DiscreteMeasure(space, pts)
    m = max(1, int(round(math.sqrt(size))))
    g = (2 * np.arange(m) + 1) / (2.0 * m)
    xx, yy = np.meshgrid(g, g, indexing="ij")
    return DiscreteMeasure(space, np.column_stack([xx.ravel(), yy.ravel()]))


def measure_to_csv(mu: DiscreteMeasure) -> str:
    """Serialise as ``x[,y],weight`` rows under a ``# space=<kind>`` header."""
    buf = io.StringIO()
    buf.write(f"# space={mu.space.kind}\n")
    cols = ["x", "weight"] if mu.space.box_dimension == 1 else ["x", "y", "weight"]
    buf.write(",".join(cols) + "\n")
    for p, w in zip(mu.points, mu.weights):
        buf.write(",".join(format(float(v), ".17g") for v in (*p, w)) + "\n")
    return buf.getvalue()


def measure_from_csv(text_or_path) -> DiscreteMeasure:
    if isinstance(text_or_path, Path) or (
        isinstance(text_or_path, str) and "\n" not in text_or_path
    ):
        text = Path(text_or_path).read_text()
    else:
        text = text_or_path
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# space="):
        raise ValueError("missing '# space=<kind>' header")
    space = PointSpace(lines[0].split("=", 1)[1].strip())
    rows = list(csv.reader(lines[2:]))
    data = np.array([[float(v) for v in row] for row in rows if row], dtype=float)
    return DiscreteMeasure(space, data[:, :-1], data[:, -1])


def coarse_grain(mu: DiscreteMeasure, bins: int) -> DiscreteMeasure:
    """Move every atom to the centre of its cell in a ``bins``-per-axis grid.

    Each atom travels at most half a cell diagonal, so the W1 shift is at
    most ``sqrt(dim) / (2 bins)``.
    """
    if bins < 1:
        raise ValueError("bins must be positive")
    cells = np.minimum(np.floor(mu.points * bins), bins - 1)
    return DiscreteMeasure(mu.space, (cells + 0.5) / bins, mu.weights)
