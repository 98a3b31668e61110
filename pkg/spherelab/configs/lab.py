"""Lab settings stored under [tool.spherelab] in pyproject.toml."""

from pathlib import Path
from typing import Any, ClassVar

from pydantic import Field
from pydantic_settings import SettingsConfigDict

from spherelab.configs.base import BaseConfig
from spherelab.io import detect_pyproject_path
from spherelab.optimize import OptimizeOptions


class LabConfig(BaseConfig):
    """Numerical defaults shared by every command."""

    model_config = SettingsConfigDict(
        env_prefix="SPHERELAB_",
        env_nested_delimiter="__",
        extra="ignore",
    )

    TOOL_SECTION: ClassVar[str] = "spherelab"

    digits: int = Field(default=12, ge=1, le=17, description="Significant digits of printed numbers")
    tol: float = Field(default=1e-8, gt=0, description="Force-residual tolerance of stationarity")
    unit_tol: float = Field(default=1e-9, gt=0, description="Largest accepted |norm - 1| of input rows")
    fd_step: float = Field(default=1e-4, gt=0, description="Finite-difference step of Hessians")
    jobs: int = Field(default=1, ge=1, description="Worker threads for basin and sweep shards")
    seed: int = Field(default=0, ge=0, description="Base seed of randomized commands")
    optimize: OptimizeOptions = Field(default_factory=OptimizeOptions)

    @classmethod
    def get_possible_config_paths(cls) -> list[Path]:
        root = detect_pyproject_path(Path.cwd())
        return [root / "pyproject.toml"] if root is not None else []

    @classmethod
    def extract_table(cls, document: dict[str, Any]) -> dict[str, Any]:
        return document.get("tool", {}).get(cls.TOOL_SECTION, {})
