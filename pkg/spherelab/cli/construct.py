"""Build named configurations and write them as JSON or CSV."""

from pathlib import Path

import rich_click as click

from spherelab.cli import ui
from spherelab.cli.common import PARTITION, format_option, handle_errors, load_settings, seed_option
from spherelab.errors import InvalidArgumentError
from spherelab.geometry import (
    PartitionType,
    SphericalConfig,
    cross_polytope,
    from_spherical,
    orthogonal_simplexes,
    pyramid_config,
    random_config,
    regular_polygon,
    regular_simplex,
    square_pyramid_fp,
)
from spherelab.io import dump_config_csv, dump_config_json, write_config
from spherelab.morse import critical_point

FAMILIES = ("partition", "simplex", "cross", "polygon", "fp", "random", "chart")


@click.command()
@click.option("--partition", type=PARTITION, default=None, help='Block sizes such as "3,2" or "1,2,2"')
@click.option(
    "--family",
    type=click.Choice(FAMILIES),
    default=None,
    help="Configuration family; inferred as 'partition' when --partition is given",
)
@click.option("--dim", type=click.IntRange(min=1), default=None, help="Ambient dimension d")
@click.option("--size", type=click.IntRange(min=2), default=None, help="Number of points (simplex, polygon, random)")
@click.option("--height", type=float, default=None, help="Base height of the square pyramid (fp)")
@click.option("--critical", type=str, default=None, help="Chart critical point C0, C1 or C2 (chart)")
@click.option("--out", "out_path", type=click.Path(path_type=Path, dir_okay=False), default=None, help="Write to this .json or .csv file")
@seed_option
@format_option
@handle_errors
def construct_command(
    partition: PartitionType | None,
    family: str | None,
    dim: int | None,
    size: int | None,
    height: float | None,
    critical: str | None,
    out_path: Path | None,
    seed: int | None,
    output_format: str,
) -> None:
    """Construct a configuration from one of the named families."""
    settings = load_settings(seed=seed)
    family = family or ("partition" if partition is not None else None)
    if family is None:
        raise InvalidArgumentError("pass --partition or --family")

    config = _build(family, partition, dim, size, height, critical, settings.seed)
    if out_path is not None:
        write_config(config, out_path)
        ui.success(f"wrote {config.size} points in R^{config.dim} to {out_path}")
        return

    if output_format == "csv":
        ui.emit(dump_config_csv(config))
    else:
        ui.emit(dump_config_json(config))


def _build(
    family: str,
    partition: PartitionType | None,
    dim: int | None,
    size: int | None,
    height: float | None,
    critical: str | None,
    seed: int,
) -> SphericalConfig:
    if family == "partition":
        if partition is None:
            raise InvalidArgumentError("--family partition needs --partition")
        if partition.has_apex:
            return pyramid_config(partition, dim)
        return orthogonal_simplexes(partition, dim)
    if family == "simplex":
        return regular_simplex(_required(size, "--size"))
    if family == "cross":
        return cross_polytope(_required(dim, "--dim"))
    if family == "polygon":
        return regular_polygon(_required(size, "--size"), dim or 2)
    if family == "fp":
        return square_pyramid_fp(_required(height, "--height"))
    if family == "random":
        return random_config(_required(dim, "--dim"), _required(size, "--size"), seed)
    return from_spherical(critical_point(_required(critical, "--critical"))).with_label(critical)


def _required(value, flag: str):
    if value is None:
        raise InvalidArgumentError(f"this family needs {flag}")
    return value
