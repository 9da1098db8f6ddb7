"""Monte-Carlo clouds of empirical measures e_n(x_j), x_j drawn from a reference."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from ._parallel import parallel_map
from .dynamics import DynamicalSystem, digit_window, orbit_from_digits
from .spaces import DiscreteMeasure, coarse_grain, uniform_measure
from .transport import pairwise_w1, w1_distance


@dataclass(frozen=True)
class EmpiricalCloud:
    """Sampled empirical measures of one system at a fixed horizon.

    ``weights`` are the member weights of the Monte-Carlo (or quadrature)
    average; uniform ``1/M`` for sampled clouds. ``diagnostic`` is the mean
    over members of ``w1(e_{n/2}, e_n)``, a measure of how far the finite
    horizon is from the limit. On 2D spaces with long orbits it is computed
    between grid coarse-grainings and is exact only up to
    ``diagnostic_slack``. ``member_shift`` bounds how far (in W1) each
    member was moved from the true empirical measure, e.g. by
    :func:`coarse_cloud`.
    """

    system: DynamicalSystem
    horizon: int
    sample_count: int
    seed: int
    members: tuple
    starts: np.ndarray
    reference: str = "uniform"
    weights: np.ndarray = field(default=None)
    diagnostic: float = math.nan
    diagnostic_slack: float = 0.0
    member_shift: float = 0.0

    def __post_init__(self):
        if self.weights is None:
            M = len(self.members)
            object.__setattr__(self, "weights", np.full(M, 1.0 / M))

    def __len__(self):
        return len(self.members)

    @property
    def space(self):
        return self.system.space

    @cached_property
    def distances(self) -> np.ndarray:
        """Pairwise W1 matrix of the members, computed once."""
        return pairwise_w1(self.members)

    @property
    def has_distances(self) -> bool:
        return "distances" in self.__dict__

    @property
    def ergodic_reference(self) -> bool:
        """False for references known to be mixtures of ergodic measures."""
        return self.reference not in ("bernoulli_mixture",)


def _digits_orbit(sys: DynamicalSystem, digits: np.ndarray, n: int) -> np.ndarray:
    return orbit_from_digits(sys, digits, n).reshape(-1, 1)


def _uniform_orbit(sys: DynamicalSystem, rng: np.random.Generator, n: int) -> np.ndarray:
    if sys.kind == "product":
        a, b = sys.components
        return np.column_stack([_uniform_orbit(a, rng, n)[:, 0], _uniform_orbit(b, rng, n)[:, 0]])
    if sys.kind in ("mul_k", "tent"):
        base = sys.params[0] if sys.kind == "mul_k" else 2
        digits = rng.integers(0, base, n + digit_window(base) - 1)
        return _digits_orbit(sys, digits, n)
    return sys.orbit(rng.random(sys.dim), n)


def _bernoulli_mixture_orbit(sys, rng, n):
    if sys.kind != "mul_k" or sys.params[0] != 2:
        raise ValueError("the Bernoulli-mixture sampler is coded for mul_2")
    p = rng.random()
    digits = (rng.random(n + digit_window(2) - 1) < p).astype(np.int64)
    return _digits_orbit(sys, digits, n)


def _cantor_orbit(sys, rng, n):
    if sys.kind != "mul_k" or sys.params[0] != 3:
        raise ValueError("the Cantor sampler is coded for mul_3")
    digits = 2 * rng.integers(0, 2, n + digit_window(3) - 1)
    return _digits_orbit(sys, digits, n)


SAMPLERS = {
    "uniform": _uniform_orbit,
    "bernoulli_mixture": _bernoulli_mixture_orbit,
    "cantor": _cantor_orbit,
}


# 2D exact transport is cubic in the atom count; beyond this many orbit
# points the diagnostic compares DIAGNOSTIC_BINS^2 grid coarse-grainings
EXACT_2D_ATOMS = 400
DIAGNOSTIC_BINS = 12


def _diagnostic_slack(sys, n):
    if sys.dim == 2 and n > EXACT_2D_ATOMS:
        return math.sqrt(2.0) / DIAGNOSTIC_BINS
    return 0.0


def _member(sys, orbit, n):
    """(e_n, w1(e_{n/2}, e_n)) from an orbit array."""
    full = DiscreteMeasure(sys.space, orbit)
    half = max(1, n // 2)
    if half == n:
        return full, 0.0
    first = DiscreteMeasure(sys.space, orbit[:half])
    if _diagnostic_slack(sys, n):
        return full, w1_distance(coarse_grain(first, DIAGNOSTIC_BINS), coarse_grain(full, DIAGNOSTIC_BINS))
    return full, w1_distance(first, full)


def sample_cloud(sys: DynamicalSystem, M: int, n: int, seed: int = 0, reference: str = "uniform") -> EmpiricalCloud:
    """M empirical measures e_n(x_j) with x_j drawn from ``reference``.

    Each start gets its own generator spawned from ``seed`` by index, so the
    result does not depend on the thread schedule. ``reference`` is one of
    ``uniform`` (Lebesgue; digit streams for ``mul_k`` and ``tent``),
    ``bernoulli_mixture`` (mul_2: p ~ U(0,1), then i.i.d. Bernoulli(p)
    binary digits) or ``cantor`` (mul_3 with digits in {0, 2}).
    """
    if M < 1 or n < 1:
        raise ValueError("M and n must be positive")
    if reference not in SAMPLERS:
        raise ValueError(f"unknown reference {reference!r}; expected one of {sorted(SAMPLERS)}")
    sampler = SAMPLERS[reference]
    children = np.random.SeedSequence(seed).spawn(M)

    def one(j):
        orbit = sampler(sys, np.random.default_rng(children[j]), n)
        mu, diag = _member(sys, orbit, n)
        return orbit[0].copy(), mu, diag

    rows = parallel_map(one, range(M))
    starts = np.array([r[0] for r in rows])
    members = tuple(r[1] for r in rows)
    diag = math.fsum(r[2] for r in rows) / M
    return EmpiricalCloud(sys, n, M, seed, members, starts, reference, diagnostic=diag, diagnostic_slack=_diagnostic_slack(sys, n))


def quadrature_cloud(sys: DynamicalSystem, size: int, n: int) -> EmpiricalCloud:
    """Deterministic cloud over the midpoint discretisation of Lebesgue measure.

    Member j is e_n of the j-th grid point, weighted by its grid mass. Meant
    for maps where float starts are harmless (identity, rotation, low n).
    """
    ref = uniform_measure(sys.space, size)
    rows = parallel_map(lambda x: _member(sys, sys.orbit(x, n), n), list(ref.points))
    members = tuple(r[0] for r in rows)
    diag = math.fsum(w * r[1] for w, r in zip(ref.weights, rows))
    starts = np.array(ref.points)
    return EmpiricalCloud(
        sys, n, len(members), 0, members, starts, "lebesgue_grid", np.array(ref.weights), diag, _diagnostic_slack(sys, n)
    )


def cloud_from_measures(measures, weights=None, system=None) -> EmpiricalCloud:
    """Wrap arbitrary measures as a cloud (for optimiser tests and probes)."""
    measures = tuple(measures)
    if not measures:
        raise ValueError("a cloud needs at least one member")
    if system is None:
        from .dynamics import identity

        system = identity(measures[0].space)
    M = len(measures)
    w = np.full(M, 1.0 / M) if weights is None else np.asarray(weights, dtype=float)
    if len(w) != M or abs(math.fsum(w) - 1.0) > 1e-9:
        raise ValueError("member weights must be a probability vector of the cloud size")
    starts = np.array([m.points[0] for m in measures])
    return EmpiricalCloud(system, 0, M, 0, measures, starts, "given", w)


def coarse_cloud(cloud: EmpiricalCloud, bins: int) -> EmpiricalCloud:
    """Cloud with every member snapped to a ``bins``-per-axis grid."""
    members = tuple(coarse_grain(m, bins) for m in cloud.members)
    shift = math.sqrt(cloud.space.box_dimension) / (2.0 * bins)
    return replace(cloud, members=members, member_shift=cloud.member_shift + shift)
