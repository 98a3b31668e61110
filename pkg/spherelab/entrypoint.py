"""Main CLI entry point for spherelab."""

import importlib
from pathlib import Path

import rich_click as click

from spherelab.cli import CliState
from spherelab.logging import ACCENT as _ACCENT, configure_logging

click.rich_click.MAX_WIDTH = 100
click.rich_click.SHOW_ARGUMENTS = True
click.rich_click.STYLE_OPTION = f"bold {_ACCENT}"
click.rich_click.STYLE_ARGUMENT = f"bold {_ACCENT}"
click.rich_click.STYLE_COMMAND = f"bold {_ACCENT}"
click.rich_click.STYLE_SWITCH = "bold cyan"
click.rich_click.STYLE_USAGE = f"bold {_ACCENT}"
click.rich_click.STYLE_HELPTEXT = ""
click.rich_click.STYLE_OPTIONS_PANEL_BORDER = "grey35"
click.rich_click.STYLE_COMMANDS_PANEL_BORDER = "grey35"


_LAZY_COMMANDS = {
    "construct": ("spherelab.cli.construct", "construct_command"),
    "energy": ("spherelab.cli.energy", "energy_command"),
    "verify": ("spherelab.cli.verify", "verify_command"),
    "classify": ("spherelab.cli.verify", "classify_command"),
    "path": ("spherelab.cli.perturb", "path_command"),
    "escape": ("spherelab.cli.perturb", "escape_command"),
    "optimize": ("spherelab.cli.optimize", "optimize_command"),
    "basin": ("spherelab.cli.optimize", "basin_command"),
    "morse": ("spherelab.cli.morse", "morse_command"),
    "sweep": ("spherelab.cli.sweep", "sweep_command"),
    "crossover": ("spherelab.cli.sweep", "crossover_command"),
}


class LazyCommandGroup(click.RichGroup):
    """Click group that defers importing subcommand modules until needed."""

    def list_commands(self, ctx: click.Context) -> list[str]:
        return sorted(_LAZY_COMMANDS)

    def get_command(self, ctx: click.Context, cmd_name: str) -> click.Command | None:
        target = _LAZY_COMMANDS.get(cmd_name)
        if target is None:
            return None
        module_name, attribute = target
        return getattr(importlib.import_module(module_name), attribute)


@click.group(cls=LazyCommandGroup)
@click.version_option(package_name="spherelab")
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path, dir_okay=False),
    default=None,
    help="TOML file with a [tool.spherelab] table (default: nearest pyproject.toml)",
)
@click.option("--verbose", is_flag=True, help="Log progress on stderr")
@click.pass_context
def cli(ctx: click.Context, config_path: Path | None, verbose: bool) -> None:
    """spherelab - stationary point configurations on the sphere."""
    configure_logging(verbose)
    ctx.obj = CliState(config_path=config_path, verbose=verbose)
