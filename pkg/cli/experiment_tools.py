"""Command-line tools for subalgebra entropy experiments"""
import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import click
import numpy as np
from pydantic import ValidationError

from cli.presets import presets as list_presets
from cli.presets import resolve_algebra, resolve_state
from cli.schema import ExperimentConfig
from config.config import settings
from modules.algebra import (
    SubalgebraStructure,
    axioms_check,
    index_by_sdp,
    pimsner_popa_index,
)
from modules.entropy import (
    aep_trace,
    duality_check,
    maximal_divergence_check,
    stein_trace,
    triple_duality_check,
)
from modules.exceptions import ConfigError, DimensionTooLarge, InvalidEpsilon, ToolkitError
from modules.resource import dio_cost_bracket, maximally_coherent_source, monotonicity_check, one_shot_cost_bracket
from modules.solver import SolverOptions

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2

Row = Dict[str, Any]
CellResult = Tuple[List[Row], bool]


def _clean(value: Any) -> Any:
    """JSON-safe copy: non-finite floats become None"""
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


# Cell workers live at module level so a process pool can pickle them

def _duality_cell(args) -> CellResult:
    N, rho, eps, alphas, opts, sample = args
    rows, passed = [], True
    for report in (duality_check(rho, N, eps, alphas, opts), triple_duality_check(rho, N, eps, alphas, opts)):
        passed = passed and report.passed
        rows.extend({"sample": sample, "check": report.kind, **row.to_row()} for row in report.rows)
    return rows, passed


def _aep_cell(args) -> CellResult:
    N, rho, eps, n_max, opts = args
    report = aep_trace(rho, N, eps, n_max, opts)
    return [{"epsilon": eps, **row.to_row()} for row in report.rows], report.passed


def _stein_cell(args) -> CellResult:
    N, rho, eps, n_max, opts = args
    rows = stein_trace(rho, N, eps, n_max, opts)
    return [row.to_row() for row in rows], all(row.passed for row in rows)


def _dilution_cell(args) -> CellResult:
    N, rho, eps, alphas, opts = args
    rows, passed = [], True
    mio = one_shot_cost_bracket(rho, N, eps, opts)
    dio = dio_cost_bracket(rho, N, eps, opts)
    for bracket in (mio, dio):
        rows.append({"row": "bracket", **bracket.to_row()})
        passed = passed and bracket.passed
    source, e_m = maximally_coherent_source(mio.witness.n)
    monotone = monotonicity_check(mio.witness.channel, source, N, e_m, alphas, opts)
    for row in monotone.rows:
        rows.append({
            "row": "monotonicity",
            "epsilon": eps,
            "alpha": row.alpha,
            "source_bits": row.before,
            "image_bits": row.after,
            "passed": row.passed,
        })
    return rows, passed and monotone.passed


def _decompose_cell(args) -> CellResult:
    N, alphas, opts = args
    inverse = pimsner_popa_index(N).inverse
    oracle = index_by_sdp(N, seed=opts.seed)
    index_ok = abs(oracle - 1 / inverse) <= 1e-5
    flat = maximal_divergence_check(N, alphas, opts)
    rows: List[Row] = [{
        "row": "structure",
        "dim": N.ambient_dim,
        "blocks": [list(b) for b in N.blocks],
        "index_inverse": inverse,
        "index_sdp": oracle,
        "passed": index_ok,
    }]
    rows.extend(
        {"row": "flat_state", "alpha": r.alpha, "value_bits": r.value, "expected_bits": r.expected, "passed": r.passed}
        for r in flat.rows
    )
    return rows, index_ok and flat.passed


def _axioms_cell(args) -> CellResult:
    N, n_max, seed = args
    report = axioms_check(N, n_max, seed=seed)
    return [check.model_dump() | {"passed": check.passed} for check in report.checks], report.passed


def _execute(worker: Callable[[Any], CellResult], cells: Sequence[Any], workers: int) -> List[CellResult]:
    """Run cells, in a process pool when asked; results keep the cell order"""
    if workers > 1 and len(cells) > 1:
        logger.info(f"Running {len(cells)} cells on {workers} workers")
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(worker, cells))
    return [worker(cell) for cell in cells]


def _states(config: ExperimentConfig, d: int) -> List[np.ndarray]:
    if config.samples > 1 and config.state == "random":
        return [resolve_state("random", d, config.seed + s) for s in range(config.samples)]
    return [resolve_state(config.state, d, config.seed)]


def _check_power(N: SubalgebraStructure, n_max: int) -> None:
    if N.ambient_dim ** n_max > settings.MAX_DIM:
        raise ConfigError(
            "d^n_max exceeds the dimension guard", dim=N.ambient_dim, n_max=n_max, limit=settings.MAX_DIM
        )


def _eps_monotonicity(rows: List[Row], slack: float) -> bool:
    """Per n, D_max^ε falls and D_H^ε rises as ε grows"""
    ok = True
    by_n: Dict[int, List[Row]] = {}
    for row in rows:
        by_n.setdefault(row["n"], []).append(row)
    for n, group in by_n.items():
        group.sort(key=lambda r: r["epsilon"])
        for prev, cur in zip(group, group[1:]):
            if cur["dmax_eps_per_copy"] is not None and prev["dmax_eps_per_copy"] is not None:
                if cur["dmax_eps_per_copy"] > prev["dmax_eps_per_copy"] + slack:
                    logger.warning(f"AEP n={n}: D_max^ε increased from ε={prev['epsilon']} to ε={cur['epsilon']}")
                    ok = False
            if cur["dh_eps_per_copy"] is not None and prev["dh_eps_per_copy"] is not None:
                if cur["dh_eps_per_copy"] < prev["dh_eps_per_copy"] - slack:
                    logger.warning(f"AEP n={n}: D_H^ε decreased from ε={prev['epsilon']} to ε={cur['epsilon']}")
                    ok = False
    return ok


def plan(config: ExperimentConfig, N: SubalgebraStructure) -> Tuple[Callable[[Any], CellResult], List[Any]]:
    """Worker and independent cells of a task"""
    opts = SolverOptions(tol=config.tol, seed=config.seed)
    d = N.ambient_dim
    if config.task == "duality":
        states = _states(config, d)
        return _duality_cell, [
            (N, rho, eps, config.alpha, opts, s) for s, rho in enumerate(states) for eps in config.eps
        ]
    if config.task in ("aep", "stein"):
        _check_power(N, config.n_max)
        rho = _states(config, d)[0]
        worker = _aep_cell if config.task == "aep" else _stein_cell
        return worker, [(N, rho, eps, config.n_max, opts) for eps in config.eps]
    if config.task == "dilution":
        return _dilution_cell, [
            (N, rho, eps, config.alpha, opts) for rho in _states(config, d) for eps in config.eps
        ]
    if config.task == "decompose":
        return _decompose_cell, [(N, config.alpha, opts)]
    n_axioms = min(config.n_max, 3)
    _check_power(N, n_axioms)
    return _axioms_cell, [(N, n_axioms, config.seed)]


def _header(config: ExperimentConfig) -> Row:
    return {
        "project": settings.PROJECT_NAME,
        "task": config.task,
        "algebra": config.algebra,
        "state": config.state,
        "seed": config.seed,
        "tol": config.tol,
        "eps": config.eps,
        "alpha": ["inf" if math.isinf(a) else a for a in config.alpha],
        "n_max": config.n_max,
        "samples": config.samples,
        "created_at": datetime.now(timezone.utc).isoformat(),
    }


def render(header: Row, rows: List[Row], passed: bool, fmt: str) -> str:
    """JSON document or CSV table with the header as comment lines"""
    if fmt == "json":
        return json.dumps(_clean({"header": header, "passed": passed, "rows": rows}), indent=2, allow_nan=False)
    buffer = io.StringIO()
    for key, value in header.items():
        buffer.write(f"# {key}: {value}\n")
    buffer.write(f"# passed: {passed}\n")
    fields: List[str] = []
    for row in rows:
        fields.extend(k for k in row if k not in fields)
    writer = csv.DictWriter(buffer, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(_clean(row))
    return buffer.getvalue()


def run(config: ExperimentConfig) -> int:
    """Run one experiment and write its report

    Returns:
        0 when every check passes, 1 when a check fails or a solver gives up,
        2 for configuration errors
    """
    logger.info(f"Task {config.task}: algebra {config.algebra}, state {config.state}, seed {config.seed}")
    try:
        N = resolve_algebra(config.algebra, seed=config.seed)
        worker, cells = plan(config, N)
    except (ConfigError, DimensionTooLarge, InvalidEpsilon) as e:
        click.echo(f"Configuration error: {e}", err=True)
        return EXIT_CONFIG_ERROR

    try:
        results = _execute(worker, cells, config.workers)
    except (DimensionTooLarge, InvalidEpsilon) as e:
        click.echo(f"Configuration error: {e}", err=True)
        return EXIT_CONFIG_ERROR
    except ToolkitError as e:
        logger.error(f"Task {config.task} failed: {e}")
        click.echo(f"Computation failed: {e}", err=True)
        return EXIT_CHECK_FAILED

    rows = [row for cell_rows, _ in results for row in cell_rows]
    passed = all(ok for _, ok in results)
    if config.task == "aep":
        passed = _eps_monotonicity(rows, max(1e-5, 20 * config.tol)) and passed

    text = render(_header(config), rows, passed, config.format)
    if config.out is not None:
        config.out.write_text(text + ("\n" if config.format == "json" else ""))
        click.echo(f"Wrote {len(rows)} rows to {config.out}")
    else:
        click.echo(text)
    logger.info(f"Task {config.task} {'passed' if passed else 'FAILED'} ({len(rows)} rows)")
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def load_config(task: str, config_path: Optional[str], overrides: Dict[str, Any]) -> ExperimentConfig:
    """Config file values overridden by the flags that were given"""
    raw: Dict[str, Any] = {}
    if config_path:
        path = Path(config_path)
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON in {path}", line=e.lineno, column=e.colno) from e
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object", path=config_path)
        if raw.get("task", task) != task:
            logger.warning(f"Config file task {raw['task']} replaced by command {task}")
    given = {k: list(v) if isinstance(v, tuple) else v for k, v in overrides.items() if v not in (None, ())}
    return ExperimentConfig(**{**raw, **given, "task": task})


def _run_command(task: str, options: Dict[str, Any]) -> int:
    config_path = options.pop("config_path")
    try:
        config = load_config(task, config_path, options)
    except ConfigError as e:
        click.echo(f"Configuration error: {e}", err=True)
        return EXIT_CONFIG_ERROR
    except ValidationError as e:
        for error in e.errors():
            field = ".".join(str(part) for part in error["loc"])
            click.echo(f"Configuration error in {field}: {error['msg']}", err=True)
        return EXIT_CONFIG_ERROR
    return run(config)


def experiment_options(func):
    """Options shared by every experiment command"""
    options = [
        click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), default=None,
                     help='JSON experiment config; flags override its values'),
        click.option('--state', default=None, help='plus, ghz-ish, random, random(SEED) or a density JSON file'),
        click.option('--algebra', default=None, help='trivial(d), diagonal(d), factor(m,n), swap-invariant or a JSON file'),
        click.option('--eps', type=float, multiple=True, help='Smoothing parameter (repeatable)'),
        click.option('--alpha', type=float, multiple=True, help='Rényi order (repeatable, inf allowed)'),
        click.option('--nmax', 'n_max', type=int, default=None, help='Largest tensor power'),
        click.option('--samples', type=int, default=None, help='Number of random states'),
        click.option('--tol', type=float, default=None, help='Solver tolerance'),
        click.option('--seed', type=int, default=None, help='Seed for every random draw'),
        click.option('--out', type=click.Path(dir_okay=False, path_type=Path), default=None, help='Output file'),
        click.option('--format', 'format', type=click.Choice(['json', 'csv']), default=None, help='Output format'),
        click.option('--workers', type=int, default=None, help='Worker processes for independent cells'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@click.group()
@click.option('--log-level', type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False),
              default=None, help='Logging level (defaults to settings)')
def toolkit(log_level):
    """Subalgebra entropy experiments"""
    logging.basicConfig(
        level=(log_level or settings.LOG_LEVEL).upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


@toolkit.command()
@experiment_options
@click.pass_context
def duality(ctx, **options):
    """Dilation and purification duality battery"""
    ctx.exit(_run_command("duality", options))


@toolkit.command()
@experiment_options
@click.pass_context
def aep(ctx, **options):
    """Per-copy smoothed divergences of ρ^⊗n against N^⊗n"""
    ctx.exit(_run_command("aep", options))


@toolkit.command()
@experiment_options
@click.pass_context
def stein(ctx, **options):
    """Composite hypothesis-testing scan"""
    ctx.exit(_run_command("stein", options))


@toolkit.command()
@experiment_options
@click.pass_context
def dilution(ctx, **options):
    """MIO and DIO cost brackets with their witness channels"""
    ctx.exit(_run_command("dilution", options))


@toolkit.command()
@experiment_options
@click.pass_context
def decompose(ctx, **options):
    """Block structure, index and flat index state of an algebra"""
    ctx.exit(_run_command("decompose", options))


@toolkit.command()
@experiment_options
@click.pass_context
def axioms(ctx, **options):
    """Free-state axioms on tensor powers of an algebra"""
    ctx.exit(_run_command("axioms", options))


@toolkit.command()
def presets():
    """List the named algebra and state presets"""
    click.echo(json.dumps(list_presets(), indent=2))


if __name__ == "__main__":
    # python -m cli.experiment_tools duality --algebra "diagonal(2)"
    toolkit()
