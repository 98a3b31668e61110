"""Stationarity checks and classification of configuration files."""

from pathlib import Path
from typing import Any

import numpy as np
import rich_click as click

from spherelab.cli import ui
from spherelab.cli.common import (
    digits_option,
    emit_values,
    format_option,
    handle_errors,
    load_config_file,
    load_settings,
    tol_option,
    unit_tol_option,
)
from spherelab.potentials import log_force_report
from spherelab.stationarity import StationaryClass, TwoSimplex, classify, factor_identities


@click.command()
@click.argument("path", type=click.Path(path_type=Path, dir_okay=False))
@tol_option
@unit_tol_option
@digits_option
@format_option
@handle_errors
def verify_command(
    path: Path,
    tol: float | None,
    unit_tol: float | None,
    digits: int | None,
    output_format: str,
) -> None:
    """Check the force equations and report the stationary class."""
    settings = load_settings(tol=tol, unit_tol=unit_tol, digits=digits)
    config = load_config_file(path, settings)
    report = log_force_report(config)
    verdict = classify(config, settings.tol)

    values: dict[str, Any] = {
        "max_residual": report.max_residual,
        "class": verdict.label,
        "max_lambda_defect": float(np.max(np.abs(report.lambda_estimates - (config.size - 1)))),
        "max_distance_sum_defect": float(np.max(np.abs(report.distance_sum_defect))),
    }
    if isinstance(verdict, TwoSimplex) and verdict.diagnostics is not None:
        values["max_identity_defect"] = factor_identities(verdict.diagnostics).max_defect()

    if verdict.key == "NonStationary":
        ui.warning(f"residual {report.max_residual:.3e} exceeds tolerance {settings.tol:g}")
    emit_values(values, settings.digits, output_format)


@click.command()
@click.argument("path", type=click.Path(path_type=Path, dir_okay=False))
@tol_option
@unit_tol_option
@digits_option
@format_option
@handle_errors
def classify_command(
    path: Path,
    tol: float | None,
    unit_tol: float | None,
    digits: int | None,
    output_format: str,
) -> None:
    """Place a configuration in the stationary taxonomy."""
    settings = load_settings(tol=tol, unit_tol=unit_tol, digits=digits)
    config = load_config_file(path, settings)
    verdict = classify(config, settings.tol)

    if output_format == "text":
        ui.emit(f"class={verdict.label}")
        return
    emit_values(_class_fields(verdict), settings.digits, output_format)


def _class_fields(verdict: StationaryClass) -> dict[str, Any]:
    fields: dict[str, Any] = {"class": verdict.label, "key": verdict.key}
    diagnostics = verdict.diagnostics
    if diagnostics is not None:
        fields["rank_A"] = diagnostics.rank_A
        if diagnostics.has_factor:
            fields["min_slack"] = diagnostics.min_slack
            fields["a"] = " ".join(repr(float(value)) for value in diagnostics.a)
    return fields
