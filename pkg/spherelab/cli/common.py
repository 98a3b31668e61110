"""Option types, shared options and error handling for the CLI commands."""

import sys
from functools import wraps
from pathlib import Path
from typing import Any, Callable, ParamSpec, TypeVar

import rich_click as click

from spherelab.cli import CliState, ui
from spherelab.configs.lab import LabConfig
from spherelab.errors import InvalidArgumentError, SphereLabError
from spherelab.geometry import PartitionType, SphericalConfig
from spherelab.io import read_config
from spherelab.potentials import PotentialKind, parse_potential

P = ParamSpec("P")
T = TypeVar("T")

OUTPUT_FORMATS = ("text", "csv", "json")


class PotentialParamType(click.ParamType):
    name = "potential"

    def convert(self, value: Any, param: click.Parameter | None, ctx: click.Context | None) -> PotentialKind:
        if not isinstance(value, str):
            return value
        try:
            return parse_potential(value)
        except InvalidArgumentError as exc:
            self.fail(str(exc), param, ctx)


class PartitionParamType(click.ParamType):
    name = "partition"

    def convert(self, value: Any, param: click.Parameter | None, ctx: click.Context | None) -> PartitionType:
        if isinstance(value, PartitionType):
            return value
        try:
            return PartitionType.parse(value)
        except InvalidArgumentError as exc:
            self.fail(str(exc), param, ctx)


POTENTIAL = PotentialParamType()
PARTITION = PartitionParamType()


def handle_errors(fn: Callable[P, T]) -> Callable[P, T]:
    """Report spherelab errors on stderr and exit with their code."""

    @wraps(fn)
    def wrapper(*args: P.args, **kwargs: P.kwargs) -> T:
        try:
            return fn(*args, **kwargs)
        except SphereLabError as exc:
            ui.error(str(exc))
            sys.exit(exc.exit_code)

    return wrapper


def load_settings(**overrides: Any) -> LabConfig:
    """Settings from the project file with command-line overrides on top."""
    ctx = click.get_current_context()
    state = ctx.find_object(CliState) or CliState()
    LabConfig.set_runtime_custom_path(state.config_path)
    return LabConfig.load_from_disk().with_overrides(**overrides)


def load_config_file(path: Path, settings: LabConfig) -> SphericalConfig:
    return read_config(path, settings.unit_tol)


def format_number(value: float, digits: int) -> str:
    return f"{value:.{digits}g}"


def format_option(fn: Callable[P, T]) -> Callable[P, T]:
    return click.option(
        "--format",
        "output_format",
        type=click.Choice(OUTPUT_FORMATS),
        default="text",
        show_default=True,
        help="Machine output format on stdout",
    )(fn)


def digits_option(fn: Callable[P, T]) -> Callable[P, T]:
    return click.option(
        "--digits",
        type=click.IntRange(1, 17),
        default=None,
        help="Significant digits of printed numbers [default: 12]",
    )(fn)


def tol_option(fn: Callable[P, T]) -> Callable[P, T]:
    return click.option(
        "--tol",
        type=click.FloatRange(min=0.0, min_open=True),
        default=None,
        help="Stationarity tolerance on the force residual [default: 1e-8]",
    )(fn)


def unit_tol_option(fn: Callable[P, T]) -> Callable[P, T]:
    return click.option(
        "--unit-tol",
        type=click.FloatRange(min=0.0, min_open=True),
        default=None,
        help="Largest accepted |norm - 1| of input rows [default: 1e-9]",
    )(fn)


def seed_option(fn: Callable[P, T]) -> Callable[P, T]:
    return click.option(
        "--seed",
        type=click.IntRange(min=0),
        default=None,
        help="Seed of every randomized step [default: 0]",
    )(fn)


def jobs_option(fn: Callable[P, T]) -> Callable[P, T]:
    return click.option(
        "--jobs",
        type=click.IntRange(min=1),
        default=None,
        help="Worker threads for independent shards [default: 1]",
    )(fn)


def potential_option(fn: Callable[P, T]) -> Callable[P, T]:
    return click.option(
        "--potential",
        "kind",
        type=POTENTIAL,
        default="log",
        show_default=True,
        help="log, riesz:S, gauss:A or biquad:A,B,C",
    )(fn)


def emit_values(values: dict[str, Any], digits: int, output_format: str) -> None:
    """One record of named values as text, CSV or JSON on stdout."""
    if output_format == "json":
        ui.emit_json(values)
        return
    rendered = {
        key: format_number(value, digits) if isinstance(value, float) else str(value)
        for key, value in values.items()
    }
    if output_format == "csv":
        ui.emit_csv(list(rendered), [list(rendered.values())])
    else:
        ui.emit(" ".join(f"{key}={value}" for key, value in rendered.items()))
