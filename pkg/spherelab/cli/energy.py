"""Energy of a configuration file under a chosen potential."""

from pathlib import Path

import rich_click as click

from spherelab.cli.common import (
    digits_option,
    emit_values,
    format_option,
    handle_errors,
    load_config_file,
    load_settings,
    potential_option,
    unit_tol_option,
)
from spherelab.geometry import min_distance
from spherelab.potentials import PotentialKind, centroid_norm, energy, riemannian_grad_norm


@click.command()
@click.argument("path", type=click.Path(path_type=Path, dir_okay=False))
@potential_option
@unit_tol_option
@digits_option
@format_option
@handle_errors
def energy_command(
    path: Path,
    kind: PotentialKind,
    unit_tol: float | None,
    digits: int | None,
    output_format: str,
) -> None:
    """Print the energy, gradient norm and spacing of a configuration."""
    settings = load_settings(unit_tol=unit_tol, digits=digits)
    config = load_config_file(path, settings)
    emit_values(
        {
            "potential": str(kind),
            "energy": energy(config, kind),
            "grad_norm": riemannian_grad_norm(config, kind),
            "min_distance": min_distance(config),
            "centroid_norm": centroid_norm(config),
        },
        settings.digits,
        output_format,
    )
