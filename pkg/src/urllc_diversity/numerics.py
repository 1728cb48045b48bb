"""Special functions, adaptive quadrature and 1-D minimization.

Everything here is pure; the heavy lifting is delegated to scipy
(`special.erfc`, `special.erfcinv`, `special.gammainc` and the QUADPACK
adaptive Gauss-Kronrod driver behind `integrate.quad`).
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy import integrate as quadpack
from scipy import special

from .errors import ConvergenceError, DomainError

logger = logging.getLogger("urllc_diversity.numerics")

_SQRT2 = math.sqrt(2.0)
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_MIN_GRID_POINTS = 64
_GOLDEN_MAX_ITERS = 200


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-9
    max_subdivisions: int = 200

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("abs_tol and rel_tol must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be at least 1")


DEFAULT_TOLERANCE = Tolerance()


def q_function(x: float) -> float:
    """Gaussian tail probability, Q(x) = erfc(x/sqrt(2))/2."""
    return 0.5 * float(special.erfc(x / _SQRT2))


def q_inverse(prob: float) -> float:
    if not 0.0 < prob < 1.0:
        raise DomainError(f"q_inverse expects a probability in (0, 1), got {prob}")
    # erfcinv loses precision near 2, so mirror the upper half.
    if prob > 0.5:  # noqa: PLR2004
        return -_SQRT2 * float(special.erfcinv(2.0 * (1.0 - prob)))
    return _SQRT2 * float(special.erfcinv(2.0 * prob))


def reg_lower_gamma(shape: float, x: float) -> float:
    """Regularized lower incomplete gamma P(shape, x)."""
    if not shape > 0:
        raise DomainError(f"Gamma shape must be positive, got {shape}")
    if x < 0:
        raise DomainError(f"Incomplete gamma argument must be >= 0, got {x}")
    return float(special.gammainc(shape, x))


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: Tolerance = DEFAULT_TOLERANCE,
) -> float:
    """Adaptive Gauss-Kronrod quadrature of ``f`` over ``[lo, hi]``.

    ``hi`` may be ``math.inf``; QUADPACK then maps the half line onto
    (0, 1] before subdividing.
    """
    if not lo < hi:
        raise DomainError(f"Integration bounds must satisfy lo < hi ({lo}, {hi})")
    result = quadpack.quad(
        f,
        lo,
        hi,
        epsabs=tol.abs_tol,
        epsrel=tol.rel_tol,
        limit=tol.max_subdivisions,
        full_output=1,
    )
    value, abserr, info = result[0], result[1], result[2]
    if len(result) > 3:  # noqa: PLR2004
        if info["last"] >= tol.max_subdivisions:
            raise ConvergenceError(
                f"Quadrature on [{lo}, {hi}] exhausted {tol.max_subdivisions} "
                f"subdivisions (estimate {value:.3e}, error {abserr:.1e})"
            )
        logger.debug("Quadrature on [%s, %s]: %s", lo, hi, result[3])
    return float(value)


def integrate_pieces(
    f: Callable[[float], float],
    breakpoints: Sequence[float],
    tol: Tolerance = DEFAULT_TOLERANCE,
) -> float:
    """Sum of `integrate` over consecutive panels, skipping empty ones."""
    total = 0.0
    for lo, hi in zip(breakpoints[:-1], breakpoints[1:], strict=True):
        if hi > lo:
            total += integrate(f, lo, hi, tol)
    return total


def minimize_scalar(
    g: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-6,
    grid_points: int = _MIN_GRID_POINTS,
) -> tuple[float, float]:
    """Grid scan followed by golden-section refinement.

    The grid is logarithmic when ``lo > 0`` and the refinement then runs on
    log(x), so ``tol`` is a relative width there. The returned value never
    exceeds the best grid value.
    """
    if not lo < hi:
        raise DomainError(f"Search interval must satisfy lo < hi ({lo}, {hi})")
    points = max(grid_points, _MIN_GRID_POINTS)
    log_scale = lo > 0
    if log_scale:
        coords = np.linspace(math.log(lo), math.log(hi), points)

        def to_x(c: float) -> float:
            return math.exp(c)
    else:
        coords = np.linspace(lo, hi, points)

        def to_x(c: float) -> float:
            return c

    def objective(c: float) -> float:
        value = g(to_x(c))
        return math.inf if math.isnan(value) else value

    values = np.array([objective(float(c)) for c in coords])
    best = int(np.argmin(values))
    best_x, best_value = to_x(float(coords[best])), float(values[best])

    a = float(coords[max(best - 1, 0)])
    b = float(coords[min(best + 1, points - 1)])
    refined_c, refined_value = _golden_section(objective, a, b, tol)
    logger.debug(
        "Grid minimum %.6g at %.6g, refined %.6g at %.6g",
        best_value,
        best_x,
        refined_value,
        to_x(refined_c),
    )
    if refined_value < best_value:
        return to_x(refined_c), refined_value
    return best_x, best_value


def _golden_section(
    h: Callable[[float], float], a: float, b: float, tol: float
) -> tuple[float, float]:
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1 = h(x1)
    f2 = h(x2)
    for _ in range(_GOLDEN_MAX_ITERS):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if f2 > f1:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = h(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = h(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)
