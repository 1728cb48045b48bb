"""Monte Carlo replay of the antenna-scan protocol.

Each sample draws M iid branch SNRs, runs the scan, and counts an error
with one Bernoulli draw against the conditional finite-blocklength error.
Samples are split into fixed batches; batch ``i`` always uses the stream
``SeedSequence(seed, spawn_key=(i,))`` so the estimate does not depend on
how many workers ran it.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .fading import ChannelModel, sample_snr_array
from .fbcode import fb_error_array
from .timing import ProtocolBudget, n_values, require_feasible

logger = logging.getLogger("urllc_diversity.montecarlo")

RELIABILITY_FLOOR = 1e-6


@dataclass(frozen=True)
class McConfig:
    samples: int = 10_000_000
    seed: int = 0
    batch_size: int = 100_000
    workers: int = 1

    def __post_init__(self) -> None:
        if self.samples < 1 or self.batch_size < 1:
            raise DomainError("samples and batch_size must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.workers < 1:
            raise DomainError("workers must be at least 1")

    def batches(self) -> list[int]:
        full, rest = divmod(self.samples, self.batch_size)
        return [self.batch_size] * full + ([rest] if rest else [])


@dataclass(frozen=True)
class McEstimate:
    error_rate: float
    std_error: float
    samples: int
    seed: int
    errors: int
    branch_counts: tuple[int, ...]
    unreliable: bool

    def z_score(self, reference: float) -> float:
        """Deviation from ``reference`` in standard errors.

        With no observed errors the spread of the reference itself is used.
        """
        std = self.std_error
        if std == 0:
            std = math.sqrt(max(reference * (1.0 - reference), 0.0) / self.samples)
        diff = self.error_rate - reference
        if std == 0:
            if abs(diff) <= 1.0 / self.samples:
                return 0.0
            return math.copysign(math.inf, diff)
        return diff / std


@dataclass(frozen=True)
class _BatchTask:
    ch: ChannelModel
    k: int
    antennas: int
    blocklengths: tuple[int, ...]
    gamma0: float
    seed: int
    index: int
    size: int


@dataclass(frozen=True)
class _BatchTally:
    errors: int
    branch_counts: tuple[int, ...]


def _run_batch(task: _BatchTask) -> _BatchTally:
    rng = np.random.default_rng(np.random.SeedSequence(task.seed, spawn_key=(task.index,)))
    snrs = sample_snr_array(task.ch, rng, (task.size, task.antennas))
    uniforms = rng.random(task.size)

    passed = snrs >= task.gamma0
    any_passed = passed.any(axis=1)
    first = np.argmax(passed, axis=1)
    chosen = np.where(any_passed, first, task.antennas)
    rows = np.arange(task.size)
    chosen_snr = np.where(any_passed, snrs[rows, first], snrs.max(axis=1))

    blocklength = np.asarray(task.blocklengths, dtype=float)[chosen]
    error_prob = np.where(
        blocklength >= 1, fb_error_array(task.k, blocklength, chosen_snr), 1.0
    )
    errors = int(np.count_nonzero(uniforms < error_prob))
    counts = np.bincount(chosen, minlength=task.antennas + 1)
    return _BatchTally(errors=errors, branch_counts=tuple(int(c) for c in counts))


def _simulate(
    ch: ChannelModel, b: ProtocolBudget, gamma0: float, cfg: McConfig
) -> McEstimate:
    require_feasible(b)
    blocklengths = tuple(n_values(b))
    sizes = cfg.batches()
    tasks = [
        _BatchTask(
            ch=ch,
            k=b.k,
            antennas=b.antennas,
            blocklengths=blocklengths,
            gamma0=gamma0,
            seed=cfg.seed,
            index=index,
            size=size,
        )
        for index, size in enumerate(sizes)
    ]
    logger.info(
        "Monte Carlo: %d samples in %d batches, seed=%d, workers=%d",
        cfg.samples,
        len(tasks),
        cfg.seed,
        cfg.workers,
    )
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as executor:
            tallies = list(executor.map(_run_batch, tasks))
    else:
        tallies = [_run_batch(task) for task in tasks]

    errors = sum(tally.errors for tally in tallies)
    counts = np.sum([tally.branch_counts for tally in tallies], axis=0)
    rate = errors / cfg.samples
    unreliable = errors == 0 or rate < RELIABILITY_FLOOR
    if unreliable:
        logger.warning(
            "Estimate %.3g from %d samples is below the reliable range", rate, cfg.samples
        )
    return McEstimate(
        error_rate=rate,
        std_error=math.sqrt(rate * (1.0 - rate) / cfg.samples),
        samples=cfg.samples,
        seed=cfg.seed,
        errors=errors,
        branch_counts=tuple(int(c) for c in counts),
        unreliable=unreliable,
    )


def simulate_sc(ch: ChannelModel, b: ProtocolBudget, cfg: McConfig) -> McEstimate:
    """Scan every branch and transmit on the strongest with n_sc channel uses."""
    return _simulate(ch, b, math.inf, cfg)


def simulate_ssc(
    ch: ChannelModel, b: ProtocolBudget, gamma0: float, cfg: McConfig
) -> McEstimate:
    if not gamma0 >= 0:
        raise DomainError(f"Threshold must be >= 0, got {gamma0}")
    return _simulate(ch, b, gamma0, cfg)
