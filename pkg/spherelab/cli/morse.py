"""Morse index of a chart critical point or a stationary configuration file."""

from pathlib import Path

import rich_click as click

from spherelab.cli import ui
from spherelab.cli.common import (
    digits_option,
    format_number,
    format_option,
    handle_errors,
    load_config_file,
    load_settings,
    potential_option,
    unit_tol_option,
)
from spherelab.errors import InvalidArgumentError
from spherelab.geometry import from_spherical, to_spherical
from spherelab.morse import MorseReport, critical_point, morse_index_conf35, morse_index_general
from spherelab.potentials import PotentialKind


@click.command()
@click.argument("path", type=click.Path(path_type=Path, dir_okay=False), required=False)
@click.option("--critical", type=str, default=None, help="Chart critical point C0, C1 or C2")
@click.option(
    "--method",
    type=click.Choice(("chart", "general")),
    default=None,
    help="Gauge-fixed chart (five points on S^2) or rotation-orbit projection [default: chart for --critical]",
)
@potential_option
@click.option("--fd-step", type=click.FloatRange(min=0.0, min_open=True), default=None, help="Finite-difference step [default: 1e-4]")
@click.option("--zero-tol", type=click.FloatRange(min=0.0, min_open=True), default=None, help="Eigenvalues within this of zero count as null")
@unit_tol_option
@digits_option
@format_option
@handle_errors
def morse_command(
    path: Path | None,
    critical: str | None,
    method: str | None,
    kind: PotentialKind,
    fd_step: float | None,
    zero_tol: float | None,
    unit_tol: float | None,
    digits: int | None,
    output_format: str,
) -> None:
    """Hessian spectrum with Morse index and nullity."""
    settings = load_settings(fd_step=fd_step, unit_tol=unit_tol, digits=digits)
    if (path is None) == (critical is None):
        raise InvalidArgumentError("pass exactly one of PATH or --critical")

    if critical is not None:
        coords = critical_point(critical)
        if (method or "chart") == "chart":
            report = morse_index_conf35(coords, settings.fd_step, zero_tol)
        else:
            report = morse_index_general(from_spherical(coords), kind, settings.fd_step, zero_tol)
    else:
        if method == "chart":
            coords = to_spherical(load_config_file(path, settings))
            report = morse_index_conf35(coords, settings.fd_step, zero_tol)
        else:
            report = morse_index_general(load_config_file(path, settings), kind, settings.fd_step, zero_tol)

    _emit(report, settings.digits, output_format)


def _emit(report: MorseReport, digits: int, output_format: str) -> None:
    if output_format == "json":
        ui.emit_json({
            "index": report.index,
            "nullity": report.nullity,
            "orbit_dim": report.orbit_dim,
            "zero_tol": report.zero_tol,
            "eigenvalues": [float(value) for value in report.eigenvalues],
        })
    elif output_format == "csv":
        ui.emit_csv(("eigenvalue",), [[format_number(float(value), digits)] for value in report.eigenvalues])
    else:
        ui.detail("eigenvalues", " ".join(format_number(float(value), 6) for value in report.eigenvalues))
        ui.emit(report.summary())
