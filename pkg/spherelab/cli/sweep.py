"""Riesz s-energy sweep and crossover search."""

import rich_click as click

from spherelab.cli import ui
from spherelab.cli.common import digits_option, format_number, handle_errors, jobs_option, load_settings
from spherelab.sweep import CROSSOVER_XTOL, find_crossover, sweep

SWEEP_COLUMNS = ("s", "e_tbp", "t_star", "e_fp_opt", "gap")


@click.command()
@click.option("--from", "s_from", type=click.FloatRange(min=0.0, min_open=True), default=1.0, show_default=True, help="First exponent s")
@click.option("--to", "s_to", type=click.FloatRange(min=0.0, min_open=True), default=16.0, show_default=True, help="Last exponent s")
@click.option("--step", type=click.FloatRange(min=0.0, min_open=True), default=0.5, show_default=True, help="Grid spacing")
@jobs_option
@digits_option
@click.option(
    "--format",
    "output_format",
    type=click.Choice(("text", "csv", "json")),
    default="csv",
    show_default=True,
    help="Machine output format on stdout",
)
@handle_errors
def sweep_command(
    s_from: float,
    s_to: float,
    step: float,
    jobs: int | None,
    digits: int | None,
    output_format: str,
) -> None:
    """Compare the bi-pyramid with the optimized square pyramid over s."""
    settings = load_settings(jobs=jobs, digits=digits)
    result = sweep(s_from, s_to, step, jobs=settings.jobs)

    if result.crossover is None:
        ui.hint("no sign change of the gap on this grid")
    else:
        ui.success(f"crossover near s={result.crossover:.9g}")

    if output_format == "json":
        ui.emit_json({
            "rows": [
                dict(zip(SWEEP_COLUMNS, (row.s, row.e_tbp, row.t_star, row.e_fp_opt, row.gap)))
                for row in result.rows
            ],
            "crossover": result.crossover,
        })
        return
    rows = [
        [format_number(value, settings.digits) for value in (row.s, row.e_tbp, row.t_star, row.e_fp_opt, row.gap)]
        for row in result.rows
    ]
    if output_format == "csv":
        ui.emit_csv(SWEEP_COLUMNS, rows)
    else:
        ui.emit("\n".join(" ".join(row) for row in rows))


@click.command()
@click.option("--lo", "s_lo", type=float, default=14.0, show_default=True, help="Lower end of the bracket")
@click.option("--hi", "s_hi", type=float, default=16.0, show_default=True, help="Upper end of the bracket")
@click.option("--xtol", type=click.FloatRange(min=0.0, min_open=True), default=CROSSOVER_XTOL, show_default=True, help="Bisection tolerance on s")
@digits_option
@handle_errors
def crossover_command(s_lo: float, s_hi: float, xtol: float, digits: int | None) -> None:
    """Bisect for the s where the two Riesz energies coincide."""
    settings = load_settings(digits=digits)
    s_star = find_crossover(s_lo, s_hi, xtol)
    ui.emit(f"s*={format_number(s_star, settings.digits)}")
