from dataclasses import dataclass
from pathlib import Path


@dataclass
class CliState:
    """Values of the global options, carried on the click context."""

    config_path: Path | None = None
    verbose: bool = False
