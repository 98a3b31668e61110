"""File formats, project discovery and the sharded runner used by experiments."""

import asyncio
import csv
import io
from functools import wraps
from pathlib import Path
from typing import Any, Callable, Coroutine, ParamSpec, Sequence, TypeVar

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from spherelab.errors import InvalidArgumentError
from spherelab.geometry import UNIT_NORM_TOL, SphericalConfig
from spherelab.logging import LOGGER

T = TypeVar("T")
R = TypeVar("R")
P = ParamSpec("P")

DEFAULT_UNIT_TOL = 1e-9


class ConfigDocument(BaseModel):
    """JSON layout of a configuration file."""

    dim: int = Field(ge=1, description="Ambient dimension d")
    points: list[list[float]] = Field(description="N rows of d coordinates")
    label: str | None = Field(default=None, description="Free-form name of the configuration")

    @model_validator(mode="after")
    def check_widths(self) -> "ConfigDocument":
        widths = {len(row) for row in self.points}
        if widths and widths != {self.dim}:
            raise ValueError(f"every point needs {self.dim} coordinates, got widths {sorted(widths)}")
        return self

    @classmethod
    def from_config(cls, config: SphericalConfig) -> "ConfigDocument":
        return cls(dim=config.dim, points=config.points.tolist(), label=config.label)


def detect_pyproject_path(start_path: Path) -> Path | None:
    """
    Detect the closest directory containing pyproject.toml.

    Args:
        start_path: Path to start searching from

    Returns:
        Path to the directory containing pyproject.toml, or None if not found
    """
    current = start_path.resolve()
    if current.is_file():
        current = current.parent

    while current != current.parent:
        if (current / "pyproject.toml").exists():
            return current
        current = current.parent
    return None


def async_to_sync(async_fn: Callable[P, Coroutine[Any, Any, T]]) -> Callable[P, T]:
    @wraps(async_fn)
    def wrapper(*args: P.args, **kwargs: P.kwargs) -> T:
        return asyncio.run(async_fn(*args, **kwargs))

    return wrapper


async def run_sharded(fn: Callable[[T], R], items: Sequence[T], jobs: int = 1) -> list[R]:
    """Run fn over items on at most `jobs` worker threads.

    Results come back in input order whatever the completion order.
    """
    if jobs < 1:
        raise InvalidArgumentError(f"jobs must be at least 1, got {jobs}")
    semaphore = asyncio.Semaphore(jobs)

    async def run_one(item: T) -> R:
        async with semaphore:
            return await asyncio.to_thread(fn, item)

    return list(await asyncio.gather(*(run_one(item) for item in items)))


map_sharded = async_to_sync(run_sharded)


def config_from_rows(
    dim: int,
    rows: Sequence[Sequence[float]],
    label: str | None = None,
    unit_tol: float = DEFAULT_UNIT_TOL,
) -> SphericalConfig:
    """Build a configuration from raw rows, renormalizing near-unit rows.

    Rows within the exact unit tolerance are kept bit for bit; rows off by
    more than `unit_tol` are rejected.
    """
    points = np.array(rows, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != dim:
        raise InvalidArgumentError(f"expected rows of {dim} coordinates, got shape {points.shape}")
    norms = np.linalg.norm(points, axis=1)
    off_sphere = np.flatnonzero(np.abs(norms - 1.0) > unit_tol)
    if off_sphere.size:
        index = int(off_sphere[0])
        raise InvalidArgumentError(
            f"row {index} has norm {norms[index]:.12g}, farther than {unit_tol:g} from 1"
        )

    drifted = np.abs(norms - 1.0) > UNIT_NORM_TOL
    if np.any(drifted):
        LOGGER.debug("renormalizing %d rows", int(drifted.sum()))
        points[drifted] /= norms[drifted, None]
    return SphericalConfig(dim, points, label=label)


def read_config_json(path: Path, unit_tol: float = DEFAULT_UNIT_TOL) -> SphericalConfig:
    try:
        document = ConfigDocument.model_validate_json(path.read_text())
    except ValidationError as exc:
        raise InvalidArgumentError(f"{path} is not a valid configuration file:\n{exc}") from exc
    return config_from_rows(document.dim, document.points, document.label, unit_tol)


def dump_config_json(config: SphericalConfig) -> str:
    return ConfigDocument.from_config(config).model_dump_json(indent=2) + "\n"


def write_config_json(config: SphericalConfig, path: Path) -> None:
    path.write_text(dump_config_json(config))


def read_config_csv(path: Path, unit_tol: float = DEFAULT_UNIT_TOL) -> SphericalConfig:
    """Read a CSV whose header is x1..xd and whose rows are points."""
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header:
            raise InvalidArgumentError(f"{path} is empty")
        expected = [f"x{index}" for index in range(1, len(header) + 1)]
        if [column.strip() for column in header] != expected:
            raise InvalidArgumentError(f"{path} header must be x1..xd, got {header}")
        try:
            rows = [[float(value) for value in row] for row in reader if row]
        except ValueError as exc:
            raise InvalidArgumentError(f"{path} has a non-numeric coordinate") from exc
    return config_from_rows(len(header), rows, label=path.stem, unit_tol=unit_tol)


def dump_table_csv(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(headers)
    writer.writerows(rows)
    return buffer.getvalue()


def write_table_csv(path: Path, headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    path.write_text(dump_table_csv(headers, rows))


def dump_config_csv(config: SphericalConfig) -> str:
    headers = [f"x{index}" for index in range(1, config.dim + 1)]
    return dump_table_csv(headers, [[repr(float(value)) for value in row] for row in config.points])


def write_config_csv(config: SphericalConfig, path: Path) -> None:
    path.write_text(dump_config_csv(config))


def read_config(path: Path, unit_tol: float = DEFAULT_UNIT_TOL) -> SphericalConfig:
    """Dispatch on the file suffix: .csv is CSV, anything else JSON."""
    if not path.exists():
        raise InvalidArgumentError(f"configuration file {path} does not exist")
    if path.suffix.lower() == ".csv":
        return read_config_csv(path, unit_tol)
    return read_config_json(path, unit_tol)


def write_config(config: SphericalConfig, path: Path) -> None:
    if path.suffix.lower() == ".csv":
        write_config_csv(config, path)
    else:
        write_config_json(config, path)
