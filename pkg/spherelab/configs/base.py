"""Base settings management for spherelab with TOML discovery."""

import sys
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, ClassVar, Type, TypeVar

from pydantic import ValidationError
from pydantic_settings import BaseSettings

from spherelab.errors import ConfigFileError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

T = TypeVar("T", bound="BaseConfig")


class BaseConfig(BaseSettings, ABC):
    """Settings read from one table of a TOML file, with environment fallbacks.

    Values from the file are passed as init arguments, so they take
    precedence over the environment, which in turn beats the defaults.
    """

    _found_path: ClassVar[Path | None] = None
    _custom_path: ClassVar[Path | None] = None

    @classmethod
    @abstractmethod
    def get_possible_config_paths(cls) -> list[Path]:
        """Return the candidate files in search order.

        :return: List of Path objects to search for configuration files

        """

    @classmethod
    @abstractmethod
    def extract_table(cls, document: dict[str, Any]) -> dict[str, Any]:
        """Pick this config's table out of a parsed TOML document."""

    @classmethod
    def set_runtime_custom_path(cls, path: Path | None) -> None:
        """Use an explicit file instead of searching; None restores discovery."""
        cls._custom_path = path
        cls._found_path = None

    @classmethod
    def get_config_path(cls) -> Path | None:
        """First existing candidate file, cached after the first lookup."""
        if cls._found_path is None:
            if cls._custom_path is not None:
                if not cls._custom_path.exists():
                    raise ConfigFileError(f"config file {cls._custom_path} does not exist")
                cls._found_path = cls._custom_path
            else:
                for path in cls.get_possible_config_paths():
                    if path.exists():
                        cls._found_path = path
                        break
        return cls._found_path

    @classmethod
    def load_from_disk(cls: Type[T]) -> T:
        """Load settings from the discovered file, or defaults when there is none.

        :return: Configuration instance

        """
        path = cls.get_config_path()
        if path is None:
            return cls()
        try:
            document = tomllib.loads(path.read_text())
        except tomllib.TOMLDecodeError as exc:
            raise ConfigFileError(f"cannot parse {path}: {exc}") from exc
        try:
            return cls(**cls.extract_table(document))
        except ValidationError as exc:
            raise ConfigFileError(f"invalid settings in {path}:\n{exc}") from exc

    def with_overrides(self: T, **overrides: Any) -> T:
        """Copy with the non-None overrides applied and validated."""
        updates = {key: value for key, value in overrides.items() if value is not None}
        if not updates:
            return self
        try:
            return type(self)(**{**self.model_dump(), **updates})
        except ValidationError as exc:
            raise ConfigFileError(f"invalid setting override:\n{exc}") from exc
