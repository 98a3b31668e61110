"""Exception hierarchy shared by every spherelab module.

Each error carries the process exit code the CLI reports for it: 2 for
arguments the caller can fix, 3 for numeric failures of the input itself.
"""

from typing import TYPE_CHECKING, ClassVar

if TYPE_CHECKING:
    from spherelab.stationarity import AMatrixDiagnostics


class SphereLabError(Exception):
    """Base class for all errors raised by spherelab."""

    exit_code: ClassVar[int] = 1


class InvalidArgumentError(SphereLabError, ValueError):
    """An argument violates an operation's precondition."""

    exit_code = 2


class ConfigFileError(SphereLabError):
    """A configuration file could not be read or failed validation."""

    exit_code = 2


class SingularPairError(SphereLabError):
    """Two points coincide where the pair potential is singular."""

    exit_code = 3

    def __init__(self, message: str, pair: tuple[int, int] | None = None) -> None:
        super().__init__(message)
        self.pair = pair


class GaugeSingularError(SphereLabError):
    """The spherical-coordinate gauge is undefined for this configuration."""

    exit_code = 3


class NotDegenerateError(SphereLabError):
    """A degenerate configuration was required but the input spans R^d."""

    exit_code = 3


class NotApplicableError(SphereLabError):
    """The operation's hypotheses do not hold for this input."""

    exit_code = 3


class UnsupportedError(SphereLabError):
    """The input lies outside the supported family (for example N != d+2)."""

    exit_code = 3


class NonStationaryError(SphereLabError):
    """A stationary configuration was required."""

    exit_code = 3

    def __init__(self, message: str, grad_norm: float) -> None:
        super().__init__(message)
        self.grad_norm = grad_norm


class ClassificationFailedError(SphereLabError):
    """A stationary configuration did not match any known structure."""

    exit_code = 3

    def __init__(
        self,
        message: str,
        diagnostics: "AMatrixDiagnostics | None" = None,
    ) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics


class BracketInvalidError(SphereLabError):
    """A root bracket does not contain a sign change."""

    exit_code = 3
