"""Lyapunov exponents along orbits and the Ruelle inequality check."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from .cloud import SAMPLERS
from .dynamics import DynamicalSystem

RUELLE_SLACK = 0.05


@dataclass(frozen=True)
class LyapunovSpectrum:
    """Exponents (descending) with Σ+ and orbit averages of log ‖Df‖.

    ``log_norm_plus`` is the average of log max(‖Df‖, 1), ``log_norm`` of
    log ‖Df‖, both over the same orbit the exponents came from.
    """

    exponents: tuple
    sum_positive: float
    orbit_length: int
    skipped: int = 0
    log_norm_plus: float = math.nan
    log_norm: float = math.nan


def _stable_mean(values: np.ndarray) -> float:
    # centring on the first value makes constant sequences exact
    x0 = float(values[0])
    return x0 + math.fsum(values - x0) / len(values)


@njit(cache=True)
def _qr_logs(J, renorm, burn_in):
    """Accumulated log stretching of an orthonormal 2-frame under J[0], J[1], ..."""
    q11, q21, q12, q22 = 1.0, 0.0, 0.0, 1.0
    s1 = 0.0
    s2 = 0.0
    n = J.shape[0]
    for t in range(n):
        a, b, c, d = J[t, 0, 0], J[t, 0, 1], J[t, 1, 0], J[t, 1, 1]
        u1 = a * q11 + b * q21
        u2 = c * q11 + d * q21
        v1 = a * q12 + b * q22
        v2 = c * q12 + d * q22
        q11, q21, q12, q22 = u1, u2, v1, v2
        if (t + 1) % renorm == 0 or t == n - 1 or t + 1 == burn_in:
            r11 = math.hypot(q11, q21)
            q11 /= r11
            q21 /= r11
            r12 = q11 * q12 + q21 * q22
            q12 -= r12 * q11
            q22 -= r12 * q21
            r22 = math.hypot(q12, q22)
            q12 /= r22
            q22 /= r22
            if t + 1 > burn_in:
                s1 += math.log(r11)
                s2 += math.log(r22)
    return s1, s2


def spectrum_from_orbit(sys: DynamicalSystem, orbit: np.ndarray, renorm: int = 10, burn_in: int = 100) -> LyapunovSpectrum:
    """Exponents from an orbit array ``(n, dim)``.

    On 2D spaces the first ``burn_in`` Jacobians only align the frame and
    are excluded from the averages (a multiple of ``renorm`` is used).
    """
    n = len(orbit)
    if sys.dim == 1:
        deriv = np.abs(sys.derivative(orbit))
        ok = deriv > 0
        skipped = int(np.count_nonzero(~ok))
        if skipped:
            warnings.warn(f"derivative vanished at {skipped} orbit points; skipped", RuntimeWarning, stacklevel=2)
        logs = np.log(deriv[ok])
        lam = _stable_mean(logs)
        plus = _stable_mean(np.maximum(logs, 0.0))
        return LyapunovSpectrum((lam,), max(lam, 0.0), n, skipped, plus, lam)
    J = sys.derivative(orbit)
    burn = min(burn_in - burn_in % renorm, (n // 2) - (n // 2) % renorm)
    s1, s2 = _qr_logs(J, renorm, burn)
    used = n - burn
    ex = tuple(sorted((s1 / used, s2 / used), reverse=True))
    norms = np.log(np.linalg.svd(J[burn:], compute_uv=False)[:, 0])
    return LyapunovSpectrum(
        ex, sum(e for e in ex if e > 0), n, 0, _stable_mean(np.maximum(norms, 0.0)), _stable_mean(norms)
    )


def lyapunov(sys: DynamicalSystem, x, n: int, renorm: int = 10) -> LyapunovSpectrum:
    """Lyapunov spectrum along the orbit of ``x`` of length ``n``."""
    if n < 1000:
        raise ValueError("use an orbit of at least 1000 points")
    if not sys.has_derivative:
        raise ValueError(f"{sys} has no derivative")
    return spectrum_from_orbit(sys, sys.orbit(x, n), renorm)


@dataclass(frozen=True)
class RuelleReport:
    """Entropy, Σ+ and the derivative bound for one system and reference.

    ``sum_positive`` is the mean of Σ+ over sampled starts. When the starts
    disagree by more than the slack the reference is not ergodic; the Katok
    count then grows at the rate of the most chaotic component carrying
    mass, so the entropy is compared with ``sum_positive_max`` instead.
    """

    system: str
    entropy: float
    sum_positive: float
    sum_positive_max: float
    derivative_bound: float
    plain_bound: float
    passed: bool
    flags: tuple = ()

    def triple(self):
        return (self.entropy, self.sum_positive, self.derivative_bound)


def ruelle_check(
    sys: DynamicalSystem,
    reference: str = "uniform",
    entropy: float | None = None,
    n: int = 100_000,
    starts: int = 16,
    seed: int = 0,
) -> RuelleReport:
    """Check h ≤ Σ+ + 0.05 and Σ+ ≤ dim · avg log max(‖Df‖, 1) + 0.05.

    Σ+ and the derivative averages are means over ``starts`` orbits drawn
    from ``reference``. ``entropy`` defaults to the Katok estimate with the
    standard settings. ``plain_bound`` repeats the bound with log ‖Df‖.
    """
    if entropy is None:
        from .entropy import default_entropy_settings, katok_entropy

        st = default_entropy_settings(sys)
        entropy = katok_entropy(
            sys, reference, st["katok_eps"], st["katok_delta"], st["katok_n"], st["katok_samples"], seed
        ).value
    children = np.random.SeedSequence([seed, 1]).spawn(starts)
    spectra = [spectrum_from_orbit(sys, SAMPLERS[reference](sys, np.random.default_rng(c), n)) for c in children]
    per_start = np.array([s.sum_positive for s in spectra])
    sigma = float(np.mean(per_start))
    sigma_max = float(per_start.max())
    bound = sys.dim * float(np.mean([s.log_norm_plus for s in spectra]))
    plain = sys.dim * float(np.mean([s.log_norm for s in spectra]))
    flags = []
    compare = sigma
    if sigma_max - per_start.min() > RUELLE_SLACK:
        flags.append("non_ergodic_reference")
        compare = sigma_max
    passed = entropy <= compare + RUELLE_SLACK and sigma <= bound + RUELLE_SLACK
    return RuelleReport(sys.name, float(entropy), sigma, sigma_max, bound, plain, bool(passed), tuple(flags))
