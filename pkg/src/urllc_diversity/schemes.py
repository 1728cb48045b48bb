"""Error evaluators for selection combining (SC) and switch-and-stay (SSC).

SSC scans branches in order and stays on the first whose SNR reaches the
threshold gamma0; when none does it switches back to the best one. The
error splits into T1 (some branch passed, term i uses n_{i-1}) and T2
(fall-back with n_M on the conditional maximum).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .errors import ConvergenceError, DomainError, InfeasibleBudgetError
from .fading import (
    ChannelModel,
    rate_to_snr,
    sc_pdf,
    snr_cdf,
    snr_pdf,
    snr_quantile,
)
from .fbcode import (
    AVERAGE_TOLERANCE,
    DEFAULT_MAX_ITERS,
    CodeSpec,
    avg_fb_error,
    snr_for_target_error,
)
from .numerics import Tolerance, minimize_scalar
from .timing import (
    ProtocolBudget,
    feasible,
    n_sc,
    n_values,
    single_antenna_blocklength,
)

logger = logging.getLogger("urllc_diversity.schemes")

# Above this quantile SSC is numerically indistinguishable from SC.
_SEARCH_TAIL_PROB = 1e-8
_SEARCH_REL_TOL = 1e-4
_QUANTILE_LEVELS = (1e-6, 0.5, 1.0 - 1e-6)


@dataclass(frozen=True)
class FixedThreshold:
    gamma0: float

    def __post_init__(self) -> None:
        if not self.gamma0 >= 0:
            raise DomainError(f"Threshold must be >= 0, got {self.gamma0}")


@dataclass(frozen=True)
class InfiniteThreshold:
    pass


@dataclass(frozen=True)
class NaiveThreshold:
    pass


@dataclass(frozen=True)
class FadingDependent:
    """Threshold from the l-power mean of the candidate blocklengths."""

    l: float = math.inf  # noqa: E741
    max_iters: int = DEFAULT_MAX_ITERS


@dataclass(frozen=True)
class NumericOptimum:
    pass


ThresholdStrategy = (
    FixedThreshold | InfiniteThreshold | NaiveThreshold | FadingDependent | NumericOptimum
)


@dataclass(frozen=True)
class SelectionCombining:
    pass


@dataclass(frozen=True)
class SwitchAndStay:
    strategy: ThresholdStrategy = field(default_factory=NumericOptimum)


Scheme = SelectionCombining | SwitchAndStay


@dataclass(frozen=True)
class SchemeEvaluation:
    error_prob: float
    threshold_used: float
    t1_terms: tuple[float, ...]
    t2_term: float
    n_values: tuple[int, ...]
    strategy: ThresholdStrategy | None = None


@dataclass(frozen=True)
class AntennaChoice:
    antennas: int
    error_prob: float
    errors: dict[int, float | None]


def _quantile_points(ch: ChannelModel, antennas: int) -> list[float]:
    """Quantiles of the strongest of ``antennas`` branches, used as panel edges."""
    return [snr_quantile(ch, level ** (1.0 / antennas)) for level in _QUANTILE_LEVELS]


def sc_error_exact(
    ch: ChannelModel, b: ProtocolBudget, tol: Tolerance = AVERAGE_TOLERANCE
) -> float:
    code = CodeSpec(k=b.k, n=n_sc(b))
    return avg_fb_error(
        code,
        partial(sc_pdf, ch, b.antennas),
        tol=tol,
        points=_quantile_points(ch, b.antennas),
    )


def sc_error_asymptotic(ch: ChannelModel, b: ProtocolBudget) -> float:
    return snr_cdf(ch, rate_to_snr(b.k / n_sc(b))) ** b.antennas


def ssc_error(
    ch: ChannelModel,
    b: ProtocolBudget,
    gamma0: float,
    tol: Tolerance = AVERAGE_TOLERANCE,
    strategy: ThresholdStrategy | None = None,
) -> SchemeEvaluation:
    if not gamma0 >= 0:
        raise DomainError(f"Threshold must be >= 0, got {gamma0}")
    blocklengths = tuple(n_values(b))
    if math.isinf(gamma0):
        sc_error = sc_error_exact(ch, b, tol)
        return SchemeEvaluation(
            error_prob=sc_error,
            threshold_used=math.inf,
            t1_terms=(0.0,) * b.antennas,
            t2_term=sc_error,
            n_values=blocklengths,
            strategy=strategy,
        )

    below = snr_cdf(ch, gamma0)
    above_cache: dict[int, float] = {}
    t1_terms: list[float] = []
    for i in range(1, b.antennas + 1):
        weight = below ** (i - 1)
        if weight == 0.0:
            t1_terms.append(0.0)
            continue
        n = blocklengths[i - 1]
        if n not in above_cache:
            above_cache[n] = _error_above(ch, b.k, n, gamma0, below, tol)
        t1_terms.append(weight * above_cache[n])

    t2_term = 0.0
    if gamma0 > 0:
        code = CodeSpec(k=b.k, n=blocklengths[-1])
        t2_term = avg_fb_error(
            code,
            partial(sc_pdf, ch, b.antennas),
            (0.0, gamma0),
            tol,
            _quantile_points(ch, b.antennas),
        )
    total = math.fsum([*t1_terms, t2_term])
    if total > 1.0:
        # Quadrature roundoff; the rescaled breakdown still sums to the total.
        t1_terms = [term / total for term in t1_terms]
        t2_term /= total
        total = min(math.fsum([*t1_terms, t2_term]), 1.0)
    return SchemeEvaluation(
        error_prob=total,
        threshold_used=gamma0,
        t1_terms=tuple(t1_terms),
        t2_term=t2_term,
        n_values=blocklengths,
        strategy=strategy,
    )


def _error_above(
    ch: ChannelModel, k: int, n: int, gamma0: float, below: float, tol: Tolerance
) -> float:
    if n < 1:
        logger.debug("Branch with n=%d has no transmission time, counted as error", n)
        return 1.0 - below
    return avg_fb_error(
        CodeSpec(k=k, n=n),
        partial(snr_pdf, ch),
        (gamma0, math.inf),
        tol,
        _quantile_points(ch, 1),
    )


def naive_threshold(b: ProtocolBudget) -> float:
    return rate_to_snr(b.k / n_sc(b))


def generalized_mean(values: list[int] | list[float], l: float) -> float:  # noqa: E741
    arr = np.asarray(values, dtype=float)
    if arr.size == 0 or np.any(arr <= 0):
        raise DomainError("Generalized mean needs a nonempty list of positive values")
    lo, hi = float(arr.min()), float(arr.max())
    if l == math.inf:
        return hi
    if l == -math.inf:
        return lo
    if l == 0:
        return float(np.exp(np.mean(np.log(arr))))
    # Scale by the dominant end so large |l| cannot overflow.
    ref = hi if l > 0 else lo
    value = ref * float(np.mean((arr / ref) ** l)) ** (1.0 / l)
    return min(max(value, lo), hi)


def fading_threshold(
    ch: ChannelModel,
    b: ProtocolBudget,
    l: float = math.inf,  # noqa: E741
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: Tolerance = AVERAGE_TOLERANCE,
) -> float:
    usable = [n for n in n_values(b) if n >= 1]
    equivalent_n = generalized_mean(usable, l)
    xi = snr_cdf(ch, rate_to_snr(b.k / equivalent_n)) ** (b.antennas - 1)
    sc_error = sc_error_exact(ch, b, tol)
    logger.info(
        "Fading-dependent target: n~=%.4g, xi=%.4g, SC error=%.4g",
        equivalent_n,
        xi,
        sc_error,
    )
    if xi >= sc_error or xi <= 0.0:
        return math.inf
    inversion = snr_for_target_error(CodeSpec(k=b.k, n=equivalent_n), xi, max_iters)
    if not inversion.converged:
        raise ConvergenceError(
            f"Threshold inversion for xi={xi:.3g} did not converge "
            f"in {max_iters} iterations"
        )
    return inversion.snr


def optimal_threshold(
    ch: ChannelModel, b: ProtocolBudget, tol: Tolerance = AVERAGE_TOLERANCE
) -> tuple[float, float]:
    """Threshold minimizing the SSC error, with that error."""
    naive = naive_threshold(b)
    lo = rate_to_snr(b.k / b.u)
    hi = snr_quantile(ch, 1.0 - _SEARCH_TAIL_PROB)
    if math.isfinite(naive):
        hi = max(hi, naive)

    def objective(gamma0: float) -> float:
        return ssc_error(ch, b, gamma0, tol).error_prob

    if lo < hi:
        logger.info("Threshold search over [%.6g, %.6g]", lo, hi)
        best_gamma, best_error = minimize_scalar(objective, lo, hi, tol=_SEARCH_REL_TOL)
    else:
        logger.info("Empty threshold search interval [%.6g, %.6g]", lo, hi)
        best_gamma, best_error = math.inf, math.inf

    candidates = [naive, math.inf]
    try:
        candidates.insert(1, fading_threshold(ch, b, math.inf, tol=tol))
    except ConvergenceError as exc:
        logger.warning("Skipping fading-dependent candidate: %s", exc)
    for gamma0 in candidates:
        error = objective(gamma0)
        if error < best_error:
            best_gamma, best_error = gamma0, error
    return best_gamma, best_error


def resolve_threshold(
    ch: ChannelModel,
    b: ProtocolBudget,
    strategy: ThresholdStrategy,
    tol: Tolerance = AVERAGE_TOLERANCE,
) -> float:
    match strategy:
        case FixedThreshold(gamma0=gamma0):
            return gamma0
        case InfiniteThreshold():
            return math.inf
        case NaiveThreshold():
            return naive_threshold(b)
        case FadingDependent(l=l, max_iters=max_iters):
            return fading_threshold(ch, b, l, max_iters, tol)
        case NumericOptimum():
            return optimal_threshold(ch, b, tol)[0]
    raise DomainError(f"Unknown threshold strategy: {strategy!r}")


def evaluate(
    ch: ChannelModel,
    b: ProtocolBudget,
    scheme: Scheme,
    tol: Tolerance = AVERAGE_TOLERANCE,
) -> SchemeEvaluation:
    if isinstance(scheme, SwitchAndStay):
        gamma0 = resolve_threshold(ch, b, scheme.strategy, tol)
        return ssc_error(ch, b, gamma0, tol, strategy=scheme.strategy)
    sc_error = sc_error_exact(ch, b, tol)
    return SchemeEvaluation(
        error_prob=sc_error,
        threshold_used=math.inf,
        t1_terms=(0.0,) * b.antennas,
        t2_term=sc_error,
        n_values=tuple(n_values(b)),
    )


def single_antenna_error(
    ch: ChannelModel, k: int, u: int, q: int, tol: Tolerance = AVERAGE_TOLERANCE
) -> float:
    n = single_antenna_blocklength(u, q)
    if n < 1:
        raise InfeasibleBudgetError(
            f"Infeasible budget: u={u} must exceed q={q}", constraint="u > q"
        )
    return avg_fb_error(
        CodeSpec(k=k, n=n), partial(snr_pdf, ch), tol=tol, points=_quantile_points(ch, 1)
    )


def best_antenna_count(
    ch: ChannelModel,
    k: int,
    u: int,
    p: int,
    q: int,
    d: int,
    scheme: Scheme,
    max_antennas: int,
    tol: Tolerance = AVERAGE_TOLERANCE,
) -> AntennaChoice:
    if max_antennas < 2:  # noqa: PLR2004
        raise DomainError(f"max_antennas must be >= 2, got {max_antennas}")
    errors: dict[int, float | None] = {}
    errors[1] = single_antenna_error(ch, k, u, q, tol) if u > q else None
    for antennas in range(2, max_antennas + 1):
        budget = ProtocolBudget(u=u, p=p, q=q, d=d, antennas=antennas, k=k)
        if not feasible(budget):
            errors[antennas] = None
            continue
        errors[antennas] = evaluate(ch, budget, scheme, tol).error_prob
        logger.info("M=%d: error %.6g", antennas, errors[antennas])

    best: tuple[int, float] | None = None
    for antennas, error in errors.items():
        if error is not None and (best is None or error < best[1]):
            best = (antennas, error)
    if best is None:
        raise InfeasibleBudgetError(
            f"No antenna count in [1, {max_antennas}] fits u={u}", constraint="u > q"
        )
    return AntennaChoice(antennas=best[0], error_prob=best[1], errors=errors)
