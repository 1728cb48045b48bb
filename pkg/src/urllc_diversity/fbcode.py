"""Finite-blocklength normal approximation and its fading averages."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError
from .fading import ChannelModel, rate_to_snr, snr_cdf
from .numerics import (
    Tolerance,
    integrate_pieces,
    q_function,
    q_inverse,
)

logger = logging.getLogger("urllc_diversity.fbcode")

LN2 = math.log(2.0)
LOG2E_SQUARED = (1.0 / LN2) ** 2
_FIXED_POINT_RTOL = 1e-9
# Fading averages reach 1e-15 and below, far under the generic abs_tol.
AVERAGE_TOLERANCE = Tolerance(abs_tol=1e-18, rel_tol=1e-8, max_subdivisions=500)
DEFAULT_MAX_ITERS = 50


@dataclass(frozen=True)
class CodeSpec:
    """Payload ``k`` bits sent over ``n`` channel uses.

    ``n`` may be real-valued so an equivalent (averaged) blocklength can be
    used without rounding.
    """

    k: int
    n: float

    def __post_init__(self) -> None:
        if isinstance(self.k, bool) or not isinstance(self.k, int) or self.k < 1:
            raise DomainError(f"Payload k must be a positive integer, got {self.k}")
        if not (self.n >= 1 and math.isfinite(self.n)):
            raise DomainError(f"Blocklength n must be >= 1, got {self.n}")

    @property
    def rate(self) -> float:
        return self.k / self.n


@dataclass(frozen=True)
class SnrInversion:
    snr: float
    iterations: int
    converged: bool


def _require_snr(gamma: float) -> None:
    if not gamma >= 0:
        raise DomainError(f"SNR must be >= 0, got {gamma}")


def capacity(gamma: float) -> float:
    _require_snr(gamma)
    return math.log1p(gamma) / LN2


def dispersion(gamma: float) -> float:
    _require_snr(gamma)
    if math.isinf(gamma):
        return LOG2E_SQUARED
    return -math.expm1(-2.0 * math.log1p(gamma)) * LOG2E_SQUARED


def correction_term(n: float | np.ndarray) -> float | np.ndarray:
    """The ln(n)/(2n) term of the normal approximation, expressed in bits.

    Drop the ``LN2`` factor for the nats reading.
    """
    return np.log(n) / (2.0 * n * LN2)


def fb_error(code: CodeSpec, gamma: float) -> float:
    _require_snr(gamma)
    if gamma == 0:
        return 1.0
    if math.isinf(gamma):
        return 0.0
    numerator = capacity(gamma) - code.rate + float(correction_term(code.n))
    return q_function(numerator / math.sqrt(dispersion(gamma) / code.n))


def fb_error_array(
    k: int, n: float | np.ndarray, gammas: float | np.ndarray
) -> np.ndarray:
    """Vectorised `fb_error`; ``n`` broadcasts against ``gammas``."""
    g = np.asarray(gammas, dtype=float)
    blocklength = np.asarray(n, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        log1p = np.log1p(g)
        numerator = log1p / LN2 - k / blocklength + correction_term(blocklength)
        spread = np.sqrt(-np.expm1(-2.0 * log1p) * LOG2E_SQUARED / blocklength)
        err = 0.5 * special.erfc(numerator / spread / math.sqrt(2.0))
    return np.where(g > 0, err, 1.0)


def rate_matching_snr(code: CodeSpec) -> float:
    """SNR at which the normal approximation crosses 1/2."""
    return rate_to_snr(code.rate - float(correction_term(code.n)))


def avg_fb_error(
    code: CodeSpec,
    pdf: Callable[[float], float],
    support: tuple[float, float] = (0.0, math.inf),
    tol: Tolerance = AVERAGE_TOLERANCE,
    points: Sequence[float] = (),
) -> float:
    """Expectation of `fb_error` under ``pdf`` restricted to ``support``.

    The SNR axis is split at the rate-matching point so the steep part of
    the integrand sits on a panel boundary. ``points`` adds further
    boundaries, typically quantiles of a density much narrower than the
    support.
    """
    lo, hi = support
    inner = {rate_matching_snr(code), *points}
    breakpoints = [lo, *sorted(x for x in inner if lo < x < hi), hi]
    value = integrate_pieces(
        lambda x: fb_error(code, x) * pdf(x), breakpoints, tol
    )
    return min(max(value, 0.0), 1.0)


def asymptotic_outage(ch: ChannelModel, code: CodeSpec) -> float:
    return snr_cdf(ch, rate_to_snr(code.rate))


def snr_for_target_error(
    code: CodeSpec, xi: float, max_iters: int = DEFAULT_MAX_ITERS
) -> SnrInversion:
    """Fixed-point inversion of `fb_error` in the SNR, started at infinity."""
    if code.n < 2:  # noqa: PLR2004
        raise DomainError(f"Inversion needs n >= 2, got {code.n}")
    if max_iters < 1:
        raise DomainError("max_iters must be at least 1")
    q_inv = q_inverse(xi)
    exponent_base = code.rate - float(correction_term(code.n))
    seed = rate_to_snr(code.rate)
    gamma = math.inf
    for iteration in range(1, max_iters + 1):
        candidate = rate_to_snr(
            exponent_base + math.sqrt(dispersion(gamma) / code.n) * q_inv
        )
        if not (math.isfinite(candidate) and candidate > 0):
            logger.debug("Iterate %d left the domain, restarting at %.6g", iteration, seed)
            candidate = seed
        if math.isfinite(gamma) and abs(candidate - gamma) <= _FIXED_POINT_RTOL * candidate:
            logger.debug("Threshold inversion converged in %d iterations", iteration)
            return SnrInversion(snr=candidate, iterations=iteration, converged=True)
        gamma = candidate
    logger.warning(
        "Threshold inversion did not converge in %d iterations (xi=%.3g)", max_iters, xi
    )
    return SnrInversion(snr=gamma, iterations=max_iters, converged=False)
