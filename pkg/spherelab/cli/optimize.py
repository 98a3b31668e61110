"""Local minimization and basin experiments."""

from pathlib import Path

import rich_click as click

from spherelab.cli import ui
from spherelab.cli.common import (
    digits_option,
    emit_values,
    format_number,
    format_option,
    handle_errors,
    jobs_option,
    load_config_file,
    load_settings,
    potential_option,
    seed_option,
    unit_tol_option,
)
from spherelab.errors import InvalidArgumentError
from spherelab.geometry import random_config
from spherelab.io import write_config, write_table_csv
from spherelab.optimize import basin_experiment, minimize
from spherelab.potentials import PotentialKind

TRACE_COLUMNS = ("iter", "energy", "grad_norm")


@click.command()
@click.argument("path", type=click.Path(path_type=Path, dir_okay=False), required=False)
@click.option("--random", "random_dim", type=click.IntRange(min=2), default=None, help="Start from d+2 random points in R^d")
@potential_option
@click.option("--max-iters", type=click.IntRange(min=1), default=None, help="Iteration cap [default: 100000]")
@click.option("--grad-tol", type=click.FloatRange(min=0.0, min_open=True), default=None, help="Gradient stopping tolerance [default: 1e-11]")
@click.option("--trace", "trace_path", type=click.Path(path_type=Path, dir_okay=False), default=None, help="Write (iter, energy, grad_norm) CSV here")
@click.option("--out", "out_path", type=click.Path(path_type=Path, dir_okay=False), default=None, help="Write the final configuration here")
@seed_option
@unit_tol_option
@digits_option
@format_option
@handle_errors
def optimize_command(
    path: Path | None,
    random_dim: int | None,
    kind: PotentialKind,
    max_iters: int | None,
    grad_tol: float | None,
    trace_path: Path | None,
    out_path: Path | None,
    seed: int | None,
    unit_tol: float | None,
    digits: int | None,
    output_format: str,
) -> None:
    """Minimize the energy from a file or a seeded random start."""
    settings = load_settings(seed=seed, unit_tol=unit_tol, digits=digits)
    options = settings.optimize.updated(max_iters=max_iters, grad_tol=grad_tol, seed=settings.seed)

    if (path is None) == (random_dim is None):
        raise InvalidArgumentError("pass exactly one of PATH or --random")
    if path is not None:
        start = load_config_file(path, settings)
    else:
        start = random_config(random_dim, random_dim + 2, options.seed)

    final, trace = minimize(start, kind, options)
    if not trace.converged:
        ui.warning(f"stopped after {trace.iterations} iterations with gradient {trace.final_grad_norm:.3e}")
    if trace_path is not None:
        rows = [
            [index, format_number(value, settings.digits), format_number(norm, settings.digits)]
            for index, value, norm in trace.rows()
        ]
        write_table_csv(trace_path, TRACE_COLUMNS, rows)
    if out_path is not None:
        write_config(final, out_path)
        ui.success(f"wrote final configuration to {out_path}")

    emit_values(
        {
            "class": trace.class_key if trace.final_class is None else trace.final_class.label,
            "energy": trace.energies[-1],
            "grad_norm": trace.final_grad_norm,
            "iterations": trace.iterations,
            "converged": trace.converged,
        },
        settings.digits,
        output_format,
    )


@click.command()
@click.option("--dim", type=click.IntRange(min=2), required=True, help="Ambient dimension d (N = d+2)")
@click.option("--trials", type=click.IntRange(min=1), default=100, show_default=True, help="Number of random starts")
@potential_option
@seed_option
@jobs_option
@digits_option
@format_option
@handle_errors
def basin_command(
    dim: int,
    trials: int,
    kind: PotentialKind,
    seed: int | None,
    jobs: int | None,
    digits: int | None,
    output_format: str,
) -> None:
    """Histogram the classes reached from random starts."""
    settings = load_settings(seed=seed, jobs=jobs, digits=digits)
    options = settings.optimize.updated(seed=settings.seed)
    ui.banner("basin", f"d={dim} · {trials} trials · {kind}")
    result = basin_experiment(dim, trials, kind, options, jobs=settings.jobs)

    histogram = result.histogram
    lowest = result.lowest_energy
    if output_format == "json":
        ui.emit_json({
            "dim": dim,
            "trials": trials,
            "histogram": histogram,
            "lowest_energy": lowest,
            "best_class": result.best_class,
            "energies": [trial.energy for trial in result.trials],
        })
        return
    rows = [
        [key, str(count), format_number(lowest[key], settings.digits)]
        for key, count in histogram.items()
    ]
    if output_format == "csv":
        ui.emit_csv(("class", "count", "lowest_energy"), rows)
    else:
        ui.emit("\n".join(" ".join(row) for row in rows))
