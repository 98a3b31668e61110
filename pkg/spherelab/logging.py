"""Console and logger shared across spherelab.

Everything human-facing goes to stderr so stdout stays reserved for machine
output (text tables, CSV, JSON). The CLI status lines and the log handler
draw on the same themed console.
"""

import logging

from rich.console import Console
from rich.logging import RichHandler
from rich.theme import Theme

ACCENT = "#60a5fa"
SUCCESS = "#34d399"
ERROR = "#f87171"
WARNING = "#fbbf24"
MUTED = "#8b8fa3"

# Rich resolves theme names only as exact matches, so compound styles
# ("accent" + bold) need their own entries.
THEME = Theme({
    "accent": ACCENT,
    "accent.bold": f"bold {ACCENT}",
    "success": SUCCESS,
    "success.bold": f"bold {SUCCESS}",
    "error": ERROR,
    "error.bold": f"bold {ERROR}",
    "warning": WARNING,
    "warning.bold": f"bold {WARNING}",
    "muted": MUTED,
})

CONSOLE = Console(theme=THEME, stderr=True)

LOGGER = logging.getLogger("spherelab")


def configure_logging(verbose: bool = False) -> None:
    """Attach the rich handler once and set the package log level."""
    if not any(isinstance(handler, RichHandler) for handler in LOGGER.handlers):
        handler = RichHandler(
            console=CONSOLE,
            show_path=False,
            show_time=False,
            markup=False,
        )
        LOGGER.addHandler(handler)
        LOGGER.propagate = False
    LOGGER.setLevel(logging.DEBUG if verbose else logging.WARNING)
