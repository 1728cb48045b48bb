from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Any, NoReturn

import typer

from .config import init_config, load_config_data
from .errors import ConfigError, ConvergenceError, DomainError, InfeasibleBudgetError
from .fading import linear_to_db
from .montecarlo import simulate_sc, simulate_ssc
from .schema import EvalParams, SweepSpec, parse_values
from .schemes import (
    SchemeEvaluation,
    SwitchAndStay,
    best_antenna_count,
    evaluate,
    fading_threshold,
    naive_threshold,
    optimal_threshold,
    sc_error_exact,
    ssc_error,
)
from .sweep import PRESETS, preset, render_csv, run_sweep, write_csv
from .timing import n_sc

app = typer.Typer(no_args_is_help=True)

EXIT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_IO = 3
EXIT_VALIDATION = 4
Z_SCORE_LIMIT = 4.0
AXIS_KEYS = {"mean_snr_db": "mean_snr_db", "antennas": "antennas", "latency_u": "u"}

ConfigOption = typer.Option(
    None, "--config", "-c", help="Flat key: value parameter file"
)
KBitsOption = typer.Option(None, "--k-bits", help="Payload size in bits")
UOption = typer.Option(None, "--u", help="Latency budget in channel uses")
POption = typer.Option(None, "--p", help="Channel uses per antenna switch")
QOption = typer.Option(None, "--q", help="Channel uses per antenna measurement")
DOption = typer.Option(None, "--d", help="Channel uses for the feedback message")
AntennasOption = typer.Option(None, "--antennas", help="Number of receive antennas")
NakagamiOption = typer.Option(None, "--nakagami-m", help="Nakagami shape m (>= 0.5)")
MeanSnrOption = typer.Option(None, "--mean-snr-db", help="Average SNR in dB")
SchemeOption = typer.Option(None, "--scheme", help="sc or ssc")
StrategyOption = typer.Option(
    None,
    "--strategy",
    help="SSC threshold: fixed:<dB>, infinite, naive, fa:<l|min|mean|max>, opt",
)
McSamplesOption = typer.Option(None, "--mc-samples", help="Monte Carlo samples")
SeedOption = typer.Option(None, "--seed", help="Monte Carlo seed")
BatchSizeOption = typer.Option(None, "--batch-size", help="Monte Carlo batch size")
WorkersOption = typer.Option(None, "--workers", help="Parallel workers")
OutOption = typer.Option(None, "--out", "-o", help="CSV output path (default stdout)")
VerboseOption = typer.Option(False, "--verbose", help="Show progress logs")


def _fail(message: str, code: int = EXIT_ERROR) -> NoReturn:
    typer.secho(message, fg=typer.colors.RED, err=True)
    raise typer.Exit(code=code)


def _fail_infeasible(exc: InfeasibleBudgetError) -> NoReturn:
    _fail(f"{exc} (violated constraint: {exc.constraint})", EXIT_INFEASIBLE)


def _configure_logging(verbose: bool) -> None:
    if verbose:
        logging.basicConfig(level=logging.INFO, format="%(message)s")


def _collect_params(
    config: Path | None, defaults: dict[str, Any] | None = None, **flags: object
) -> EvalParams:
    try:
        data = load_config_data(config) if config else {}
        merged = {**(defaults or {}), **data}
        merged.update({key: value for key, value in flags.items() if value is not None})
        return EvalParams.from_dict(merged)
    except ConfigError as exc:
        _fail(str(exc))


def _format_db(value: float) -> str:
    return "inf dB" if math.isinf(value) else f"{linear_to_db(value):.4f} dB"


def _report(params: EvalParams, result: SchemeEvaluation) -> None:
    label = "sc" if params.scheme == "sc" else f"ssc ({params.strategy})"
    budget = params.budget()
    typer.echo(f"scheme: {label}")
    typer.echo(f"channel: m={params.nakagami_m:g}, mean SNR={params.mean_snr_db:g} dB")
    typer.echo(
        f"budget: k={params.k_bits}, u={params.u}, p={params.p}, "
        f"q={params.q}, d={params.d}, M={params.antennas}"
    )
    typer.echo(f"n_sc: {n_sc(budget)}")
    typer.echo("n_i: " + ", ".join(str(n) for n in result.n_values))
    typer.echo(f"threshold: {_format_db(result.threshold_used)}")
    typer.echo("T1: " + ", ".join(f"{term:.6e}" for term in result.t1_terms))
    typer.echo(f"T2: {result.t2_term:.6e}")
    typer.echo(f"error probability: {result.error_prob:.6e}")


@app.command("init-config")
def init_config_cmd(
    config: Path = typer.Option(
        Path("urllc-diversity.yaml"), "--config", "-c", help="Path to write"
    ),
    force: bool = typer.Option(False, "--force", help="Overwrite existing config"),
) -> None:
    """Write a parameter file with the reference configuration."""
    try:
        init_config(config, overwrite=force)
    except ConfigError as exc:
        _fail(str(exc))
    typer.echo(f"Initialized {config}")


@app.command("eval")
def eval_cmd(
    config: Path | None = ConfigOption,
    k_bits: int | None = KBitsOption,
    u: int | None = UOption,
    p: int | None = POption,
    q: int | None = QOption,
    d: int | None = DOption,
    antennas: int | None = AntennasOption,
    nakagami_m: float | None = NakagamiOption,
    mean_snr_db: float | None = MeanSnrOption,
    scheme: str | None = SchemeOption,
    strategy: str | None = StrategyOption,
    verbose: bool = VerboseOption,
) -> None:
    """Evaluate one configuration and print the T1/T2 breakdown."""
    _configure_logging(verbose)
    params = _collect_params(
        config,
        k_bits=k_bits,
        u=u,
        p=p,
        q=q,
        d=d,
        antennas=antennas,
        nakagami_m=nakagami_m,
        mean_snr_db=mean_snr_db,
        scheme=scheme,
        strategy=strategy,
    )
    try:
        result = evaluate(params.channel(), params.budget(), params.to_scheme())
    except InfeasibleBudgetError as exc:
        _fail_infeasible(exc)
    except (ConvergenceError, DomainError) as exc:
        _fail(str(exc))
    _report(params, result)


@app.command("optimize-threshold")
def optimize_threshold_cmd(
    config: Path | None = ConfigOption,
    k_bits: int | None = KBitsOption,
    u: int | None = UOption,
    p: int | None = POption,
    q: int | None = QOption,
    d: int | None = DOption,
    antennas: int | None = AntennasOption,
    nakagami_m: float | None = NakagamiOption,
    mean_snr_db: float | None = MeanSnrOption,
    verbose: bool = VerboseOption,
) -> None:
    """Search the SSC threshold and compare it with the closed-form choices."""
    _configure_logging(verbose)
    params = _collect_params(
        config,
        k_bits=k_bits,
        u=u,
        p=p,
        q=q,
        d=d,
        antennas=antennas,
        nakagami_m=nakagami_m,
        mean_snr_db=mean_snr_db,
    )
    ch = params.channel()
    try:
        budget = params.budget()
        best_gamma, best_error = optimal_threshold(ch, budget)
        naive = naive_threshold(budget)
        fading = fading_threshold(ch, budget)
        references = {
            "naive": (naive, ssc_error(ch, budget, naive).error_prob),
            "fa:max": (fading, ssc_error(ch, budget, fading).error_prob),
            "sc": (math.inf, sc_error_exact(ch, budget)),
        }
    except InfeasibleBudgetError as exc:
        _fail_infeasible(exc)
    except (ConvergenceError, DomainError) as exc:
        _fail(str(exc))
    typer.echo(f"optimal threshold: {_format_db(best_gamma)}")
    typer.echo(f"optimal error probability: {best_error:.6e}")
    for name, (gamma0, error) in references.items():
        typer.echo(f"{name}: threshold {_format_db(gamma0)}, error {error:.6e}")


@app.command("optimize-antennas")
def optimize_antennas_cmd(
    config: Path | None = ConfigOption,
    k_bits: int | None = KBitsOption,
    u: int | None = UOption,
    p: int | None = POption,
    q: int | None = QOption,
    d: int | None = DOption,
    nakagami_m: float | None = NakagamiOption,
    mean_snr_db: float | None = MeanSnrOption,
    scheme: str | None = SchemeOption,
    strategy: str | None = StrategyOption,
    max_antennas: int = typer.Option(10, "--max-antennas", help="Largest M tried"),
    verbose: bool = VerboseOption,
) -> None:
    """Find the antenna count with the lowest error for a scheme."""
    _configure_logging(verbose)
    params = _collect_params(
        config,
        defaults={"antennas": 2},
        k_bits=k_bits,
        u=u,
        p=p,
        q=q,
        d=d,
        nakagami_m=nakagami_m,
        mean_snr_db=mean_snr_db,
        scheme=scheme,
        strategy=strategy,
    )
    try:
        choice = best_antenna_count(
            params.channel(),
            params.k_bits,
            params.u,
            params.p,
            params.q,
            params.d,
            params.to_scheme(),
            max_antennas,
        )
    except InfeasibleBudgetError as exc:
        _fail_infeasible(exc)
    except (ConvergenceError, DomainError) as exc:
        _fail(str(exc))
    for antennas, error in choice.errors.items():
        value = "infeasible" if error is None else f"{error:.6e}"
        typer.echo(f"M={antennas}: {value}")
    typer.echo(f"best: M={choice.antennas}, error {choice.error_prob:.6e}")


@app.command("validate")
def validate_cmd(
    config: Path | None = ConfigOption,
    k_bits: int | None = KBitsOption,
    u: int | None = UOption,
    p: int | None = POption,
    q: int | None = QOption,
    d: int | None = DOption,
    antennas: int | None = AntennasOption,
    nakagami_m: float | None = NakagamiOption,
    mean_snr_db: float | None = MeanSnrOption,
    scheme: str | None = SchemeOption,
    strategy: str | None = StrategyOption,
    mc_samples: int | None = McSamplesOption,
    seed: int | None = SeedOption,
    batch_size: int | None = BatchSizeOption,
    workers: int | None = WorkersOption,
    verbose: bool = VerboseOption,
) -> None:
    """Check the analytical error against a Monte Carlo replay."""
    _configure_logging(verbose)
    params = _collect_params(
        config,
        k_bits=k_bits,
        u=u,
        p=p,
        q=q,
        d=d,
        antennas=antennas,
        nakagami_m=nakagami_m,
        mean_snr_db=mean_snr_db,
        scheme=scheme,
        strategy=strategy,
        mc_samples=mc_samples,
        seed=seed,
        batch_size=batch_size,
        workers=workers,
    )
    ch = params.channel()
    scheme_spec = params.to_scheme()
    try:
        budget = params.budget()
        result = evaluate(ch, budget, scheme_spec)
        if isinstance(scheme_spec, SwitchAndStay):
            estimate = simulate_ssc(ch, budget, result.threshold_used, params.mc_config())
        else:
            estimate = simulate_sc(ch, budget, params.mc_config())
    except InfeasibleBudgetError as exc:
        _fail_infeasible(exc)
    except (ConvergenceError, DomainError) as exc:
        _fail(str(exc))

    z_score = estimate.z_score(result.error_prob)
    passed = abs(z_score) <= Z_SCORE_LIMIT
    typer.echo(f"analytic: {result.error_prob:.6e}")
    typer.echo(
        f"monte carlo: {estimate.error_rate:.6e} +/- {estimate.std_error:.2e} "
        f"({estimate.samples} samples, seed {estimate.seed})"
    )
    if estimate.unreliable:
        typer.echo("note: estimate below the reliable Monte Carlo range")
    typer.echo(f"z-score: {z_score:.3f}")
    if not passed:
        typer.secho("FAIL", fg=typer.colors.RED)
        raise typer.Exit(code=EXIT_VALIDATION)
    typer.secho("PASS", fg=typer.colors.GREEN)


def _emit(spec: SweepSpec, out: Path | None, workers: int) -> None:
    try:
        rows = run_sweep(spec, workers=workers)
    except ConfigError as exc:
        _fail(str(exc))
    if out is None:
        typer.echo(render_csv(rows), nl=False)
        return
    try:
        write_csv(rows, out)
    except OSError as exc:
        _fail(f"Cannot write {out}: {exc}", EXIT_IO)
    typer.echo(f"Wrote {len(rows)} rows to {out}")


@app.command("sweep")
def sweep_cmd(
    axis: str = typer.Option(..., "--axis", help="mean_snr_db, antennas or latency_u"),
    values: str = typer.Option(
        ..., "--values", help="Comma list or inclusive start:stop:step"
    ),
    curve: list[str] = typer.Option(..., "--curve", help="Curve id, repeatable"),
    config: Path | None = ConfigOption,
    k_bits: int | None = KBitsOption,
    u: int | None = UOption,
    p: int | None = POption,
    q: int | None = QOption,
    d: int | None = DOption,
    antennas: int | None = AntennasOption,
    nakagami_m: float | None = NakagamiOption,
    mean_snr_db: float | None = MeanSnrOption,
    mc_samples: int | None = McSamplesOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
    workers: int = typer.Option(1, "--workers", help="Parallel sweep points"),
    verbose: bool = VerboseOption,
) -> None:
    """Evaluate curves along one parameter axis and emit CSV."""
    _configure_logging(verbose)
    try:
        axis_values = parse_values(values)
    except ConfigError as exc:
        _fail(str(exc))
    if axis not in AXIS_KEYS:
        _fail(f"axis must be one of {', '.join(AXIS_KEYS)}")
    defaults = {AXIS_KEYS[axis]: axis_values[0]} if axis_values else {}
    if axis != "mean_snr_db" and defaults:
        defaults = {key: int(value) for key, value in defaults.items()}
    fixed = _collect_params(
        config,
        defaults=defaults,
        k_bits=k_bits,
        u=u,
        p=p,
        q=q,
        d=d,
        antennas=antennas,
        nakagami_m=nakagami_m,
        mean_snr_db=mean_snr_db,
    )
    try:
        spec = SweepSpec(
            axis=axis,
            values=axis_values,
            fixed=fixed,
            curves=tuple(curve),
            mc_samples=mc_samples,
            seed=seed,
        )
    except ConfigError as exc:
        _fail(str(exc))
    _emit(spec, out, workers)


@app.command("preset")
def preset_cmd(
    name: str = typer.Argument(..., help="fig1, fig2 or fig3"),
    mc_samples: int | None = McSamplesOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
    workers: int = typer.Option(1, "--workers", help="Parallel sweep points"),
    verbose: bool = VerboseOption,
) -> None:
    """Run the sweep behind one of the published figures."""
    _configure_logging(verbose)
    if name not in PRESETS:
        _fail(f"Unknown preset: {name} (expected {', '.join(PRESETS)})")
    try:
        spec = preset(name).with_mc(mc_samples, seed)
    except ConfigError as exc:
        _fail(str(exc))
    _emit(spec, out, workers)


def _command_line_error() -> type[Exception]:
    """Base class of the errors typer raises for a malformed command line."""
    for cls in typer.BadParameter.__mro__:
        if cls.__name__ == "ClickException" and issubclass(cls, Exception):
            return cls
    return typer.BadParameter


def main() -> None:
    command_line_error = _command_line_error()
    try:
        code = app(standalone_mode=False)
    except typer.Abort as exc:
        typer.secho("Aborted!", fg=typer.colors.RED, err=True)
        raise SystemExit(EXIT_ERROR) from exc
    except command_line_error as exc:
        typer.secho(f"Error: {exc}", fg=typer.colors.RED, err=True)
        raise SystemExit(EXIT_ERROR) from exc
    raise SystemExit(code if isinstance(code, int) else 0)
