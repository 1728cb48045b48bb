from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields, replace
from typing import Any

from .errors import ConfigError, DomainError
from .fading import ChannelModel, db_to_linear, linear_to_db
from .montecarlo import McConfig
from .schemes import (
    FadingDependent,
    FixedThreshold,
    InfiniteThreshold,
    NaiveThreshold,
    NumericOptimum,
    Scheme,
    SelectionCombining,
    SwitchAndStay,
    ThresholdStrategy,
)
from .timing import ProtocolBudget

SCHEMES = ("sc", "ssc")
AXES = ("mean_snr_db", "antennas", "latency_u")
ANALYTIC_CURVES = ("sc-asymptotic", "asymptotic-bound")
_GENERALIZED_MEAN_ALIASES = {"min": -math.inf, "mean": 1.0, "max": math.inf}
_CURVE_SUFFIX_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


def _require_int(data: dict, key: str, minimum: int = 1) -> int:
    if key not in data:
        raise ConfigError(f"Missing required key: {key}")
    return _as_int(data[key], key, minimum)


def _optional_int(data: dict, key: str, default: int, minimum: int = 1) -> int:
    if data.get(key) is None:
        return default
    return _as_int(data[key], key, minimum)


def _as_int(value: object, key: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"Expected integer for '{key}'")
    if value < minimum:
        raise ConfigError(f"'{key}' must be >= {minimum}, got {value}")
    return value


def _require_float(data: dict, key: str) -> float:
    if key not in data:
        raise ConfigError(f"Missing required key: {key}")
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"Expected number for '{key}'")
    if not math.isfinite(value):
        raise ConfigError(f"Expected finite number for '{key}'")
    return float(value)


def _optional_str(data: dict, key: str, default: str) -> str:
    if data.get(key) is None:
        return default
    value = data[key]
    if not isinstance(value, str) or not value.strip():
        raise ConfigError(f"Expected non-empty string for '{key}'")
    return value.strip()


def parse_strategy(text: str) -> ThresholdStrategy:
    """Parse ``fixed:<dB>``, ``infinite``, ``naive``, ``fa:<l|min|mean|max>``, ``opt``."""
    name, _, arg = text.strip().partition(":")
    if name == "infinite" and not arg:
        return InfiniteThreshold()
    if name == "naive" and not arg:
        return NaiveThreshold()
    if name == "opt" and not arg:
        return NumericOptimum()
    if name == "fixed" and arg:
        try:
            return FixedThreshold(gamma0=db_to_linear(float(arg)))
        except (ValueError, DomainError) as exc:
            raise ConfigError(f"Invalid fixed threshold: {arg}") from exc
    if name == "fa" and arg:
        if arg in _GENERALIZED_MEAN_ALIASES:
            return FadingDependent(l=_GENERALIZED_MEAN_ALIASES[arg])
        try:
            return FadingDependent(l=float(arg))
        except ValueError as exc:
            raise ConfigError(f"Invalid generalized-mean order: {arg}") from exc
    raise ConfigError(f"Unknown strategy: {text}")


def format_strategy(strategy: ThresholdStrategy) -> str:
    match strategy:
        case FixedThreshold(gamma0=gamma0):
            return f"fixed:{linear_to_db(gamma0):g}"
        case InfiniteThreshold():
            return "infinite"
        case NaiveThreshold():
            return "naive"
        case FadingDependent(l=order):
            aliases = {v: k for k, v in _GENERALIZED_MEAN_ALIASES.items()}
            return f"fa:{aliases.get(order, f'{order:g}')}"
    return "opt"


def curve_scheme(curve: str) -> Scheme:
    """Scheme behind a sweep curve id such as ``sc`` or ``ssc-fa-max``."""
    if curve == "sc":
        return SelectionCombining()
    if curve.startswith("ssc-"):
        rest = curve.removeprefix("ssc-")
        for prefix in ("fa", "fixed"):
            if rest.startswith(f"{prefix}-"):
                rest = f"{prefix}:" + rest.removeprefix(f"{prefix}-")
        return SwitchAndStay(strategy=parse_strategy(rest))
    raise ConfigError(f"Unknown curve: {curve}")


def validate_curve(curve: str) -> None:
    if curve not in ANALYTIC_CURVES:
        curve_scheme(curve)


@dataclass(frozen=True)
class EvalParams:
    k_bits: int
    u: int
    antennas: int
    nakagami_m: float
    mean_snr_db: float
    p: int = 4
    q: int = 16
    d: int = 24
    scheme: str = "sc"
    strategy: str = "opt"
    mc_samples: int = 10_000_000
    seed: int = 0
    batch_size: int = 100_000
    workers: int = 1

    @classmethod
    def keys(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def from_dict(cls, data: dict) -> EvalParams:
        if not isinstance(data, dict):
            raise ConfigError("Parameters must be a mapping")
        unknown = sorted(set(data) - set(cls.keys()))
        if unknown:
            raise ConfigError(f"Unknown keys: {', '.join(map(str, unknown))}")
        params = cls(
            k_bits=_require_int(data, "k_bits"),
            u=_require_int(data, "u"),
            antennas=_require_int(data, "antennas", minimum=2),
            nakagami_m=_require_float(data, "nakagami_m"),
            mean_snr_db=_require_float(data, "mean_snr_db"),
            p=_optional_int(data, "p", 4),
            q=_optional_int(data, "q", 16),
            d=_optional_int(data, "d", 24),
            scheme=_optional_str(data, "scheme", "sc"),
            strategy=_optional_str(data, "strategy", "opt"),
            mc_samples=_optional_int(data, "mc_samples", 10_000_000),
            seed=_optional_int(data, "seed", 0, minimum=0),
            batch_size=_optional_int(data, "batch_size", 100_000),
            workers=_optional_int(data, "workers", 1),
        )
        params.validate()
        return params

    def validate(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {', '.join(SCHEMES)}")
        parse_strategy(self.strategy)
        try:
            self.channel()
            self.mc_config()
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def channel(self) -> ChannelModel:
        return ChannelModel.from_db(self.nakagami_m, self.mean_snr_db)

    def budget(self) -> ProtocolBudget:
        return ProtocolBudget(
            u=self.u, p=self.p, q=self.q, d=self.d, antennas=self.antennas, k=self.k_bits
        )

    def threshold_strategy(self) -> ThresholdStrategy:
        return parse_strategy(self.strategy)

    def to_scheme(self) -> Scheme:
        if self.scheme == "ssc":
            return SwitchAndStay(strategy=self.threshold_strategy())
        return SelectionCombining()

    def mc_config(self) -> McConfig:
        return McConfig(
            samples=self.mc_samples,
            seed=self.seed,
            batch_size=self.batch_size,
            workers=self.workers,
        )

    def with_overrides(self, overrides: dict[str, Any]) -> EvalParams:
        merged = {**self.to_dict(), **overrides}
        return EvalParams.from_dict(merged)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class SweepVariant:
    """A labelled set of parameter overrides; the label suffixes curve ids."""

    label: str = ""
    overrides: dict[str, Any] = field(default_factory=dict)

    def curve_id(self, curve: str) -> str:
        return f"{curve}@{self.label}" if self.label else curve


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple[float, ...]
    fixed: EvalParams
    curves: tuple[str, ...]
    mc_samples: int | None = None
    seed: int | None = None
    variants: tuple[SweepVariant, ...] = (SweepVariant(),)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.axis not in AXES:
            raise ConfigError(f"axis must be one of {', '.join(AXES)}")
        if not self.values:
            raise ConfigError("Sweep values must be nonempty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ConfigError("Sweep values must be strictly increasing")
        if self.axis != "mean_snr_db" and any(v != int(v) for v in self.values):
            raise ConfigError(f"Sweep values for '{self.axis}' must be integers")
        if not self.curves:
            raise ConfigError("At least one curve is required")
        for curve in self.curves:
            validate_curve(curve)
        if self.mc_samples is not None and self.mc_samples < 1:
            raise ConfigError("mc_samples must be >= 1")
        for variant in self.variants:
            if variant.label and not _CURVE_SUFFIX_RE.fullmatch(variant.label):
                raise ConfigError(f"Invalid variant label: {variant.label}")

    def point(self, variant: SweepVariant, axis_value: float) -> EvalParams:
        overrides: dict[str, Any] = dict(variant.overrides)
        if self.axis == "mean_snr_db":
            overrides["mean_snr_db"] = float(axis_value)
        elif self.axis == "antennas":
            overrides["antennas"] = int(axis_value)
        else:
            overrides["u"] = int(axis_value)
        if self.mc_samples is not None:
            overrides["mc_samples"] = self.mc_samples
        if self.seed is not None:
            overrides["seed"] = self.seed
        return self.fixed.with_overrides(overrides)

    def with_mc(self, mc_samples: int | None, seed: int | None) -> SweepSpec:
        return replace(
            self,
            mc_samples=self.mc_samples if mc_samples is None else mc_samples,
            seed=self.seed if seed is None else seed,
        )


def parse_values(text: str) -> tuple[float, ...]:
    """``4,8,12`` or an inclusive ``start:stop:step`` range."""
    try:
        if ":" in text:
            start, stop, step = (float(part) for part in text.split(":"))
            if step <= 0:
                raise ConfigError("Range step must be positive")
            count = math.floor((stop - start) / step + 1e-9) + 1
            return tuple(round(start + i * step, 12) for i in range(max(count, 0)))
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"Invalid sweep values: {text}") from exc
