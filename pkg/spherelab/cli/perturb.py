"""The pyramid saddle path and the degenerate escape."""

import math
from pathlib import Path

import numpy as np
import rich_click as click

from spherelab.cli import ui
from spherelab.cli.common import (
    digits_option,
    emit_values,
    format_number,
    format_option,
    handle_errors,
    load_config_file,
    load_settings,
    potential_option,
    unit_tol_option,
)
from spherelab.io import write_config
from spherelab.perturbation import degenerate_escape, path_bracket, pyramid_energy
from spherelab.potentials import PotentialKind

PATH_COLUMNS = ("t", "f", "f_direct", "derivative", "sign")


@click.command()
@click.option("--k", "k", type=click.IntRange(min=2), required=True, help="Size of the first base simplex")
@click.option("--m", "m", type=click.IntRange(min=2), required=True, help="Size of the second base simplex")
@click.option("--points", type=click.IntRange(min=2), default=101, show_default=True, help="Grid points over the bracket")
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
def path_command(k: int, m: int, points: int, digits: int | None, output_format: str) -> None:
    """Tabulate the log energy along the {1,k,m} pyramid path."""
    settings = load_settings(digits=digits)
    low, high = path_bracket(k, m)
    grid = np.linspace(low, high, points)
    grid[np.abs(grid) < 1e-12] = 0.0
    samples = [pyramid_energy(k, m, float(t)) for t in grid]

    if output_format == "json":
        ui.emit_json([
            dict(zip(PATH_COLUMNS, (s.t, s.energy, s.energy_direct, s.derivative, s.derivative_sign)))
            for s in samples
        ])
        return
    rows = [
        [
            format_number(s.t, settings.digits),
            format_number(s.energy, settings.digits),
            format_number(s.energy_direct, settings.digits),
            format_number(s.derivative, settings.digits),
            str(s.derivative_sign),
        ]
        for s in samples
    ]
    if output_format == "csv":
        ui.emit_csv(PATH_COLUMNS, rows)
    else:
        ui.emit("\n".join(" ".join(row) for row in rows))


@click.command()
@click.argument("path", type=click.Path(path_type=Path, dir_okay=False))
@potential_option
@click.option(
    "--theta",
    type=click.FloatRange(0.0, math.pi, min_open=True, max_open=True),
    default=0.5,
    show_default=True,
    help="Rotation angle in (0, pi)",
)
@click.option("--out", "out_path", type=click.Path(path_type=Path, dir_okay=False), default=None, help="Write the escaped configuration here")
@unit_tol_option
@digits_option
@format_option
@handle_errors
def escape_command(
    path: Path,
    kind: PotentialKind,
    theta: float,
    out_path: Path | None,
    unit_tol: float | None,
    digits: int | None,
    output_format: str,
) -> None:
    """Lower the energy of a degenerate configuration by a pair rotation."""
    settings = load_settings(unit_tol=unit_tol, digits=digits)
    config = load_config_file(path, settings)
    result = degenerate_escape(config, kind, theta)
    if out_path is not None:
        write_config(result.config, out_path)
        ui.success(f"wrote escaped configuration to {out_path}")
    emit_values(
        {
            "energy_delta": result.energy_delta,
            "pair": f"{result.pair[0]}-{result.pair[1]}",
            "witness": result.witness,
        },
        settings.digits,
        output_format,
    )
