"""Parameter sweeps over SNR, antenna count or latency budget, and CSV output."""

from __future__ import annotations

import csv
import io
import logging
import tempfile
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .errors import ConvergenceError, InfeasibleBudgetError
from .fading import asymptotic_lower_bound, linear_to_db
from .montecarlo import McEstimate, simulate_sc, simulate_ssc
from .schema import (
    EvalParams,
    SweepSpec,
    SweepVariant,
    curve_scheme,
)
from .schemes import SwitchAndStay, evaluate, sc_error_asymptotic
from .timing import feasible, n_sc

logger = logging.getLogger("urllc_diversity.sweep")

CSV_HEADER = (
    "axis",
    "axis_value",
    "curve",
    "error_prob",
    "threshold_db",
    "n_sc",
    "feasible",
    "mc_estimate",
    "mc_std_error",
    "seed",
)

FIG1_CURVES = (
    "sc",
    "ssc-opt",
    "ssc-naive",
    "ssc-fa-min",
    "ssc-fa-mean",
    "ssc-fa-max",
    "asymptotic-bound",
)
FIG23_CURVES = ("sc", "sc-asymptotic", "ssc-opt", "ssc-fa-max")


@dataclass(frozen=True)
class SweepRow:
    axis: str
    axis_value: float
    curve: str
    error_prob: float | None
    threshold_used: float | None
    n_sc: int | None
    feasible: bool
    mc_estimate: float | None = None
    mc_std_error: float | None = None
    seed: int | None = None


def format_float(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.8e}"


def _format_axis(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else format_float(value)


def _row_fields(row: SweepRow) -> list[str]:
    threshold_db = (
        None if row.threshold_used is None else linear_to_db(row.threshold_used)
    )
    return [
        row.axis,
        _format_axis(row.axis_value),
        row.curve,
        format_float(row.error_prob),
        format_float(threshold_db),
        "" if row.n_sc is None else str(row.n_sc),
        "true" if row.feasible else "false",
        format_float(row.mc_estimate),
        format_float(row.mc_std_error),
        "" if row.seed is None else str(row.seed),
    ]


def evaluate_point(
    params: EvalParams,
    axis: str,
    axis_value: float,
    curve: str,
    variant: SweepVariant,
    *,
    with_mc: bool,
) -> SweepRow:
    curve_id = variant.curve_id(curve)
    budget = params.budget()
    if not feasible(budget):
        return SweepRow(axis, axis_value, curve_id, None, None, None, feasible=False)
    ch = params.channel()
    try:
        if curve == "asymptotic-bound":
            error = asymptotic_lower_bound(ch, params.k_bits, params.u, params.antennas)
            return SweepRow(axis, axis_value, curve_id, error, None, n_sc(budget), True)
        if curve == "sc-asymptotic":
            error = sc_error_asymptotic(ch, budget)
            return SweepRow(axis, axis_value, curve_id, error, None, n_sc(budget), True)

        scheme = curve_scheme(curve)
        result = evaluate(ch, budget, scheme)
        estimate: McEstimate | None = None
        if with_mc:
            cfg = params.mc_config()
            if isinstance(scheme, SwitchAndStay):
                estimate = simulate_ssc(ch, budget, result.threshold_used, cfg)
            else:
                estimate = simulate_sc(ch, budget, cfg)
    except InfeasibleBudgetError as exc:
        logger.info("Point %s=%s %s infeasible: %s", axis, axis_value, curve_id, exc)
        return SweepRow(axis, axis_value, curve_id, None, None, None, feasible=False)
    except ConvergenceError as exc:
        logger.warning("Point %s=%s %s skipped: %s", axis, axis_value, curve_id, exc)
        return SweepRow(axis, axis_value, curve_id, None, None, n_sc(budget), True)
    return SweepRow(
        axis=axis,
        axis_value=axis_value,
        curve=curve_id,
        error_prob=result.error_prob,
        threshold_used=result.threshold_used,
        n_sc=n_sc(budget),
        feasible=True,
        mc_estimate=None if estimate is None else estimate.error_rate,
        mc_std_error=None if estimate is None else estimate.std_error,
        seed=None if estimate is None else estimate.seed,
    )


def run_sweep(spec: SweepSpec, *, workers: int = 1) -> list[SweepRow]:
    """Rows in axis-major, curve-minor order regardless of ``workers``."""
    with_mc = spec.mc_samples is not None
    tasks: list[Callable[[], SweepRow]] = []
    for axis_value in spec.values:
        for variant in spec.variants:
            params = spec.point(variant, axis_value)
            for curve in spec.curves:
                tasks.append(
                    _point_task(params, spec.axis, axis_value, curve, variant, with_mc)
                )
    logger.info("Sweep over %s: %d points", spec.axis, len(tasks))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(lambda task: task(), tasks))
    return [task() for task in tasks]


def _point_task(
    params: EvalParams,
    axis: str,
    axis_value: float,
    curve: str,
    variant: SweepVariant,
    with_mc: bool,  # noqa: FBT001
) -> Callable[[], SweepRow]:
    def _task() -> SweepRow:
        row = evaluate_point(params, axis, axis_value, curve, variant, with_mc=with_mc)
        logger.info("%s=%s %s: %s", axis, axis_value, row.curve, row.error_prob)
        return row

    return _task


def render_csv(rows: list[SweepRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(_row_fields(row))
    return buffer.getvalue()


def write_csv(rows: list[SweepRow], out_path: Path) -> None:
    """Write through a temp file in the target directory, then replace."""
    content = render_csv(rows)
    with tempfile.NamedTemporaryFile(
        mode="w",
        encoding="utf-8",
        delete=False,
        dir=out_path.parent,
        prefix=f"{out_path.name}.",
        suffix=".tmp",
        newline="",
    ) as handle:
        temp_path = Path(handle.name)
        handle.write(content)
    try:
        temp_path.replace(out_path)
    finally:
        if temp_path.exists():
            temp_path.unlink()


def _fig_base(**overrides: float) -> EvalParams:
    base = {
        "k_bits": 256,
        "u": 200,
        "antennas": 6,
        "nakagami_m": 2.0,
        "mean_snr_db": 12.0,
        "p": 4,
        "q": 16,
        "d": 24,
    }
    return EvalParams.from_dict({**base, **overrides})


def preset(name: str) -> SweepSpec:
    if name == "fig1":
        return SweepSpec(
            axis="mean_snr_db",
            values=tuple(float(v) for v in range(4, 21)),
            fixed=_fig_base(),
            curves=FIG1_CURVES,
        )
    if name == "fig2":
        return SweepSpec(
            axis="antennas",
            values=tuple(float(v) for v in range(2, 11)),
            fixed=_fig_base(nakagami_m=1.0),
            curves=FIG23_CURVES,
            variants=(
                SweepVariant("m1", {"nakagami_m": 1.0}),
                SweepVariant("m4", {"nakagami_m": 4.0}),
            ),
        )
    if name == "fig3":
        return SweepSpec(
            axis="latency_u",
            values=tuple(float(v) for v in range(100, 401, 10)),
            fixed=_fig_base(),
            curves=FIG23_CURVES,
            variants=(
                SweepVariant("p4q16d24", {"p": 4, "q": 16, "d": 24}),
                SweepVariant("p2q8d12", {"p": 2, "q": 8, "d": 12}),
            ),
        )
    raise KeyError(name)


PRESETS = ("fig1", "fig2", "fig3")
