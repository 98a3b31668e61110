"""Hessian spectra and Morse indices of stationary configurations.

Two instruments: the gauge-fixed 7-angle chart of five points on S^2, and a
general one that differentiates along orthonormal tangent directions of
every point and projects out the rotation orbit.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import eigvalsh, null_space, orth

from spherelab.errors import GaugeSingularError, InvalidArgumentError, NonStationaryError
from spherelab.geometry import (
    Conf35Coords,
    FloatArray,
    SphericalConfig,
    from_spherical,
    normalize_rows,
)
from spherelab.logging import LOGGER
from spherelab.potentials import (
    LogPotential,
    PairPotential,
    energy,
    log_energy_difference,
    riemannian_grad_norm,
)

DEFAULT_FD_STEP = 1e-4
ZERO_TOL_RATIO = 1e-6
GAUGE_TOL = 1e-8
CHART_STATIONARY_TOL = 1e-6
STATIONARY_TOL = 1e-8

_APEX_POLAR = math.acos(-0.25)

CRITICAL_POINTS: dict[str, Conf35Coords] = {
    # Regular pentagon on the great circle through the pole.
    "C0": Conf35Coords(
        np.array([2 * math.pi / 5, 0.0, 4 * math.pi / 5, math.pi, 4 * math.pi / 5, math.pi, 2 * math.pi / 5])
    ),
    # Square pyramid with base height -1/4.
    "C1": Conf35Coords(
        np.array([_APEX_POLAR, math.pi / 2, _APEX_POLAR, math.pi, _APEX_POLAR, 3 * math.pi / 2, _APEX_POLAR])
    ),
    # Triangular bi-pyramid with its axis horizontal, keeping points 2-5 off the poles.
    "C2": Conf35Coords(
        np.array([math.pi / 2, math.pi, math.pi / 2, math.pi / 2, 2 * math.pi / 3, 3 * math.pi / 2, 2 * math.pi / 3])
    ),
}


@dataclass(frozen=True, eq=False)
class MorseReport:
    eigenvalues: FloatArray
    index: int
    nullity: int
    orbit_dim: int
    zero_tol: float

    @property
    def dimension(self) -> int:
        return int(self.eigenvalues.size)

    def summary(self) -> str:
        return f"index={self.index} nullity={self.nullity} orbit_dim={self.orbit_dim}"


def critical_point(name: str) -> Conf35Coords:
    try:
        return CRITICAL_POINTS[name.upper()]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown critical point {name!r}; expected one of {', '.join(CRITICAL_POINTS)}"
        ) from None


def energy_in_chart(v: Conf35Coords) -> float:
    """Log energy of the five points the chart coordinates describe."""
    if _gauge_singular(v):
        LOGGER.warning("chart point has a polar angle at 0 or pi; azimuth derivatives degenerate")
    return energy(from_spherical(v), LogPotential())


def chart_gradient(v: Conf35Coords, fd_step: float = DEFAULT_FD_STEP) -> FloatArray:
    """Central-difference gradient of the chart energy."""
    _require_regular_gauge(v)
    return finite_difference_gradient(_chart_offset(v), v.values, fd_step)


def hessian_conf35(v: Conf35Coords, fd_step: float = DEFAULT_FD_STEP) -> FloatArray:
    """Symmetrized 7x7 finite-difference Hessian of the chart energy."""
    _require_regular_gauge(v)
    hessian = finite_difference_hessian(_chart_offset(v), v.values, fd_step)
    return 0.5 * (hessian + hessian.T)


def morse_index_conf35(
    v: Conf35Coords,
    fd_step: float = DEFAULT_FD_STEP,
    zero_tol: float | None = None,
) -> MorseReport:
    # Coarse Hessian steps still get a gradient check at the default resolution.
    gradient_norm = float(np.linalg.norm(chart_gradient(v, min(fd_step, DEFAULT_FD_STEP))))
    if gradient_norm > CHART_STATIONARY_TOL:
        raise NonStationaryError(
            f"chart gradient norm {gradient_norm:.3e} exceeds {CHART_STATIONARY_TOL:g}", gradient_norm
        )
    eigenvalues = eigvalsh(hessian_conf35(v, fd_step))
    return _report(eigenvalues, orbit_dim=0, zero_tol=zero_tol)


def morse_index_general(
    config: SphericalConfig,
    kind: PairPotential,
    fd_step: float = DEFAULT_FD_STEP,
    zero_tol: float | None = None,
) -> MorseReport:
    """Morse index on Conf(d, N) with the rotation orbit projected out.

    Coordinates are d-1 orthonormal tangent directions per point, mapped to
    the sphere by radial normalization; at a critical point the Hessian in
    these coordinates is the Riemannian one.
    """
    grad_norm = riemannian_grad_norm(config, kind)
    if grad_norm > STATIONARY_TOL:
        raise NonStationaryError(
            f"Riemannian gradient norm {grad_norm:.3e} exceeds {STATIONARY_TOL:g}", grad_norm
        )

    bases = [null_space(point[None, :]) for point in config.points]
    objective = _tangent_offset(config, kind, bases)
    coordinates = len(bases) * (config.dim - 1)
    hessian = finite_difference_hessian(objective, np.zeros(coordinates), fd_step)
    hessian = 0.5 * (hessian + hessian.T)

    orbit = rotation_orbit_basis(config, bases)
    complement = null_space(orbit.T) if orbit.size else np.eye(coordinates)
    projected = complement.T @ hessian @ complement
    eigenvalues = eigvalsh(0.5 * (projected + projected.T))
    LOGGER.debug("general Hessian: %d coordinates, orbit %d", coordinates, orbit.shape[1])
    return _report(eigenvalues, orbit_dim=int(orbit.shape[1]), zero_tol=zero_tol)


def rotation_orbit_basis(config: SphericalConfig, bases: list[FloatArray]) -> FloatArray:
    """Orthonormal basis of the directions (W x_1, ..., W x_N), W skew."""
    dim = config.dim
    columns = []
    for a in range(dim):
        for b in range(a + 1, dim):
            generator = np.zeros((dim, dim))
            generator[a, b], generator[b, a] = 1.0, -1.0
            moved = config.points @ generator.T
            columns.append(np.concatenate([basis.T @ row for basis, row in zip(bases, moved)]))
    if not columns:
        return np.zeros((len(bases) * (dim - 1), 0))
    return orth(np.column_stack(columns))


def finite_difference_gradient(
    fn: Callable[[FloatArray], float],
    x0: FloatArray,
    step: float = DEFAULT_FD_STEP,
) -> FloatArray:
    size = x0.size
    gradient = np.zeros(size)
    for index in range(size):
        offset = np.zeros(size)
        offset[index] = step
        gradient[index] = (fn(x0 + offset) - fn(x0 - offset)) / (2.0 * step)
    return gradient


def finite_difference_hessian(
    fn: Callable[[FloatArray], float],
    x0: FloatArray,
    step: float = DEFAULT_FD_STEP,
) -> FloatArray:
    """Second-order central differences of a scalar function.

    The diagonal uses f(x +- 2h e_i); off-diagonal entries use the
    four-point stencil f(x +- h e_i +- h e_j).
    """
    size = x0.size
    center = fn(x0)
    shifts = step * np.eye(size)
    hessian = np.zeros((size, size))
    for i in range(size):
        for j in range(i, size):
            if i == j:
                value = fn(x0 + 2 * shifts[i]) - 2 * center + fn(x0 - 2 * shifts[i])
            else:
                value = (
                    fn(x0 + shifts[i] + shifts[j])
                    - fn(x0 + shifts[i] - shifts[j])
                    - fn(x0 - shifts[i] + shifts[j])
                    + fn(x0 - shifts[i] - shifts[j])
                )
            hessian[i, j] = hessian[j, i] = value / (4.0 * step * step)
    return hessian


def _report(eigenvalues: FloatArray, orbit_dim: int, zero_tol: float | None) -> MorseReport:
    eigenvalues = np.sort(np.asarray(eigenvalues, dtype=np.float64))
    if zero_tol is None:
        zero_tol = ZERO_TOL_RATIO * float(np.max(np.abs(eigenvalues), initial=0.0))
    return MorseReport(
        eigenvalues=eigenvalues,
        index=int(np.count_nonzero(eigenvalues < -zero_tol)),
        nullity=int(np.count_nonzero(np.abs(eigenvalues) <= zero_tol)),
        orbit_dim=orbit_dim,
        zero_tol=zero_tol,
    )


def _chart_offset(v: Conf35Coords) -> Callable[[FloatArray], float]:
    # Energies relative to the base point keep full precision in the differences.
    base = from_spherical(v)

    def offset(values: FloatArray) -> float:
        return log_energy_difference(base, _chart_points(values))

    return offset


def _chart_points(values: FloatArray) -> SphericalConfig:
    # Shifted angles may leave the canonical ranges; the points stay valid.
    theta = np.concatenate([[0.0], values[[0, 2, 4, 6]]])
    phi = np.concatenate([[0.0, 0.0], values[[1, 3, 5]]])
    points = np.column_stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
    )
    return SphericalConfig(3, points, allow_coincident=True)


def _tangent_offset(
    config: SphericalConfig,
    kind: PairPotential,
    bases: list[FloatArray],
) -> Callable[[FloatArray], float]:
    split = config.dim - 1
    is_log = isinstance(kind, LogPotential)
    reference = 0.0 if is_log else energy(config, kind)

    def offset(xi: FloatArray) -> float:
        shifts = np.vstack(
            [basis @ xi[index * split : (index + 1) * split] for index, basis in enumerate(bases)]
        )
        moved = SphericalConfig(
            config.dim, normalize_rows(config.points + shifts), allow_coincident=True
        )
        if is_log:
            return log_energy_difference(config, moved)
        return energy(moved, kind) - reference

    return offset


def _gauge_singular(v: Conf35Coords) -> bool:
    polar = v.values[[0, 2, 4, 6]]
    return bool(np.any((polar < GAUGE_TOL) | (polar > math.pi - GAUGE_TOL)))


def _require_regular_gauge(v: Conf35Coords) -> None:
    if _gauge_singular(v):
        raise GaugeSingularError("a polar angle of points 2-5 is at 0 or pi")
