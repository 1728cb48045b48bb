"""Nakagami-m per-antenna SNR law and its selection-combining order statistic.

The SNR of a Nakagami-m envelope with mean power ``mean_snr`` is
Gamma(shape=m, scale=mean_snr/m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError
from .numerics import reg_lower_gamma

MIN_NAKAGAMI_M = 0.5


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    if value <= 0:
        return -math.inf
    if math.isinf(value):
        return math.inf
    return 10.0 * math.log10(value)


def rate_to_snr(rate: float) -> float:
    """SNR 2^rate - 1 whose capacity equals ``rate``; inf once 2^rate overflows."""
    with np.errstate(over="ignore"):
        return float(np.exp2(rate)) - 1.0


@dataclass(frozen=True)
class ChannelModel:
    m: float
    mean_snr: float

    def __post_init__(self) -> None:
        if not self.m >= MIN_NAKAGAMI_M:
            raise DomainError(f"Nakagami m must be >= {MIN_NAKAGAMI_M}, got {self.m}")
        if not (self.mean_snr > 0 and math.isfinite(self.mean_snr)):
            raise DomainError(f"Mean SNR must be positive, got {self.mean_snr}")

    @classmethod
    def from_db(cls, m: float, mean_snr_db: float) -> ChannelModel:
        return cls(m=m, mean_snr=db_to_linear(mean_snr_db))

    @property
    def scale(self) -> float:
        return self.mean_snr / self.m


def _require_snr(x: float) -> None:
    if not x >= 0:
        raise DomainError(f"SNR must be >= 0, got {x}")


def _require_antennas(antennas: int) -> None:
    if antennas < 1:
        raise DomainError(f"Antenna count must be >= 1, got {antennas}")


def snr_cdf(ch: ChannelModel, x: float) -> float:
    _require_snr(x)
    return reg_lower_gamma(ch.m, x / ch.scale)


def snr_pdf(ch: ChannelModel, x: float) -> float:
    _require_snr(x)
    if math.isinf(x):
        return 0.0
    log_density = (
        float(special.xlogy(ch.m - 1.0, x))
        - x / ch.scale
        - ch.m * math.log(ch.scale)
        - math.lgamma(ch.m)
    )
    return math.exp(log_density)


def snr_quantile(ch: ChannelModel, prob: float) -> float:
    if not 0.0 <= prob < 1.0:
        raise DomainError(f"Quantile level must lie in [0, 1), got {prob}")
    return float(special.gammaincinv(ch.m, prob)) * ch.scale


def sc_cdf(ch: ChannelModel, antennas: int, x: float) -> float:
    """CDF of the largest of ``antennas`` iid branch SNRs."""
    _require_antennas(antennas)
    return snr_cdf(ch, x) ** antennas


def sc_pdf(ch: ChannelModel, antennas: int, x: float) -> float:
    _require_antennas(antennas)
    if antennas == 1:
        return snr_pdf(ch, x)
    return antennas * snr_cdf(ch, x) ** (antennas - 1) * snr_pdf(ch, x)


def asymptotic_lower_bound(ch: ChannelModel, k: int, u: int, antennas: int) -> float:
    """F(2^(k/u) - 1)^M: every channel use spent on data, no overhead."""
    _require_antennas(antennas)
    return snr_cdf(ch, rate_to_snr(k / u)) ** antennas


def sample_snr(ch: ChannelModel, rng: np.random.Generator) -> float:
    return float(rng.gamma(ch.m, ch.scale))


def sample_snr_array(
    ch: ChannelModel, rng: np.random.Generator, size: int | tuple[int, ...]
) -> np.ndarray:
    # numpy's Marsaglia-Tsang sampler boosts shapes below 1 internally.
    return rng.gamma(ch.m, ch.scale, size=size)
