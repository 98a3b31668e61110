"""Pair potentials, configuration energies, gradients and force residuals.

Energies sum over ordered pairs i != j, so each unordered pair counts twice.
The logarithmic kind is -log|x - y| itself, so reported values include the
constant shift that separates it from the -(1/2) log(1 - t) form.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from spherelab.errors import InvalidArgumentError, SingularPairError
from spherelab.geometry import FloatArray, SphericalConfig, centroid, gram

SINGULAR_GAP = 1e-15


class PairPotential(ABC):
    """A pair potential h(t) of the inner product t = x_i . x_j."""

    singular_at_one: bool = True

    @property
    @abstractmethod
    def name(self) -> str:
        """Spelling accepted by `parse_potential`."""

    @property
    @abstractmethod
    def is_strictly_convex(self) -> bool:
        """Whether h'' > 0 on [-1, 1)."""

    @abstractmethod
    def _value(self, t: FloatArray) -> FloatArray: ...

    @abstractmethod
    def _first(self, t: FloatArray) -> FloatArray: ...

    @abstractmethod
    def _second(self, t: FloatArray) -> FloatArray: ...

    def evaluate(self, t: ArrayLike, order: int = 0) -> FloatArray:
        """h, h' or h'' evaluated elementwise."""
        values = np.asarray(t, dtype=np.float64)
        if np.any(values > 1.0 + 1e-12):
            raise InvalidArgumentError("inner products must not exceed 1")
        if self.singular_at_one and np.any(1.0 - values < SINGULAR_GAP):
            raise SingularPairError(f"{self.name} potential is singular at t = 1")
        if order == 0:
            return self._value(values)
        if order == 1:
            return self._first(values)
        if order == 2:
            return self._second(values)
        raise InvalidArgumentError(f"derivative order must be 0, 1 or 2, got {order}")

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class LogPotential(PairPotential):
    """h(t) = -(1/2) log(2 - 2t) = -log|x - y|."""

    @property
    def name(self) -> str:
        return "log"

    @property
    def is_strictly_convex(self) -> bool:
        return True

    def _value(self, t: FloatArray) -> FloatArray:
        return -0.5 * np.log(2.0 - 2.0 * t)

    def _first(self, t: FloatArray) -> FloatArray:
        return 1.0 / (2.0 - 2.0 * t)

    def _second(self, t: FloatArray) -> FloatArray:
        return 2.0 / (2.0 - 2.0 * t) ** 2


@dataclass(frozen=True)
class RieszPotential(PairPotential):
    """h(t) = sign(s) (2 - 2t)^(-s/2) = sign(s) |x - y|^(-s).

    Negative s flips the sign so minimizing still spreads the points.
    """

    s: float

    def __post_init__(self) -> None:
        if self.s == 0 or not math.isfinite(self.s):
            raise InvalidArgumentError(f"Riesz exponent must be finite and nonzero, got {self.s}")

    @property
    def name(self) -> str:
        return f"riesz:{self.s:g}"

    @property
    def singular_at_one(self) -> bool:  # type: ignore[override]
        # h' carries (2-2t)^(-s/2-1), singular unless s <= -2.
        return self.s > -2

    @property
    def is_strictly_convex(self) -> bool:
        return self.s > -2

    def _value(self, t: FloatArray) -> FloatArray:
        return math.copysign(1.0, self.s) * (2.0 - 2.0 * t) ** (-self.s / 2.0)

    def _first(self, t: FloatArray) -> FloatArray:
        return abs(self.s) * (2.0 - 2.0 * t) ** (-self.s / 2.0 - 1.0)

    def _second(self, t: FloatArray) -> FloatArray:
        return abs(self.s) * (self.s + 2.0) * (2.0 - 2.0 * t) ** (-self.s / 2.0 - 2.0)


@dataclass(frozen=True)
class GaussPotential(PairPotential):
    """h(t) = exp(alpha t)."""

    alpha: float
    singular_at_one = False

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise InvalidArgumentError(f"Gaussian alpha must be positive, got {self.alpha}")

    @property
    def name(self) -> str:
        return f"gauss:{self.alpha:g}"

    @property
    def is_strictly_convex(self) -> bool:
        return True

    def _value(self, t: FloatArray) -> FloatArray:
        return np.exp(self.alpha * t)

    def _first(self, t: FloatArray) -> FloatArray:
        return self.alpha * np.exp(self.alpha * t)

    def _second(self, t: FloatArray) -> FloatArray:
        return self.alpha**2 * np.exp(self.alpha * t)


@dataclass(frozen=True)
class BiQuadraticPotential(PairPotential):
    """h(t) = a t^2 + b t + c with a > 0 and b > 2a."""

    a: float
    b: float
    c: float = 0.0
    singular_at_one = False

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise InvalidArgumentError(f"bi-quadratic a must be positive, got {self.a}")
        if not self.b > 2 * self.a:
            raise InvalidArgumentError(f"bi-quadratic needs b > 2a, got a={self.a}, b={self.b}")

    @property
    def name(self) -> str:
        return f"biquad:{self.a:g},{self.b:g},{self.c:g}"

    @property
    def is_strictly_convex(self) -> bool:
        return True

    def _value(self, t: FloatArray) -> FloatArray:
        return self.a * t * t + self.b * t + self.c

    def _first(self, t: FloatArray) -> FloatArray:
        return 2.0 * self.a * t + self.b

    def _second(self, t: FloatArray) -> FloatArray:
        return np.full_like(t, 2.0 * self.a)


PotentialKind = LogPotential | RieszPotential | GaussPotential | BiQuadraticPotential


@dataclass(frozen=True)
class StationarityReport:
    """Force-equation defects of a configuration under the log potential."""

    per_point_residual: FloatArray
    max_residual: float
    lambda_estimates: FloatArray
    distance_sum_defect: FloatArray


def parse_potential(text: str) -> PotentialKind:
    """Parse `log`, `riesz:S`, `gauss:A` or `biquad:A,B,C`."""
    kind, _, arguments = text.strip().lower().partition(":")
    try:
        values = [float(value) for value in arguments.split(",") if value.strip()]
    except ValueError as exc:
        raise InvalidArgumentError(f"cannot parse potential parameters in {text!r}") from exc

    if kind == "log" and not values:
        return LogPotential()
    if kind == "riesz" and len(values) == 1:
        return RieszPotential(values[0])
    if kind == "gauss" and len(values) == 1:
        return GaussPotential(values[0])
    if kind == "biquad" and len(values) in (2, 3):
        return BiQuadraticPotential(*values)
    raise InvalidArgumentError(
        f"unknown potential {text!r}; expected log, riesz:S, gauss:A or biquad:A,B,C"
    )


def pair_potential(kind: PairPotential, t: float, order: int = 0) -> float:
    return float(kind.evaluate(t, order))


def energy(config: SphericalConfig, kind: PairPotential) -> float:
    """Sum of h(x_i . x_j) over ordered pairs i != j."""
    upper = np.triu_indices(config.size, k=1)
    inner = gram(config)[upper]
    _check_singular(kind, inner, upper)
    return 2.0 * float(np.sum(kind.evaluate(inner)))


def euclidean_gradient(config: SphericalConfig, kind: PairPotential) -> FloatArray:
    """Gradient of the ordered-pair energy with respect to each point."""
    inner = gram(config)
    upper = np.triu_indices(config.size, k=1)
    _check_singular(kind, inner[upper], upper)

    weights = np.zeros_like(inner)
    weights[upper] = kind.evaluate(inner[upper], order=1)
    weights = weights + weights.T
    return 2.0 * weights @ config.points


def tangent_gradient(config: SphericalConfig, kind: PairPotential) -> FloatArray:
    """Euclidean gradient with each point's radial component removed."""
    gradient = euclidean_gradient(config, kind)
    radial = np.sum(gradient * config.points, axis=1, keepdims=True)
    return gradient - radial * config.points


def riemannian_grad_norm(config: SphericalConfig, kind: PairPotential) -> float:
    """Largest tangential gradient norm over the points."""
    return float(np.max(np.linalg.norm(tangent_gradient(config, kind), axis=1)))


def log_force_report(config: SphericalConfig) -> StationarityReport:
    """Defects of the force equations and of the distance-sum identity.

    With r_ij = 1 - x_i . x_j the force on x_i is sum_j (x_i - x_j)/r_ij,
    which at a stationary configuration equals (N-1) x_i, and every row
    satisfies sum_j r_ij = N.
    """
    size = config.size
    points = config.points
    inner = gram(config)
    upper = np.triu_indices(size, k=1)
    _check_singular(LogPotential(), inner[upper], upper)

    gaps = 1.0 - inner
    np.fill_diagonal(gaps, np.inf)
    inverse = 1.0 / gaps
    forces = inverse.sum(axis=1, keepdims=True) * points - inverse @ points

    residual = np.linalg.norm(forces - (size - 1) * points, axis=1)
    lambdas = np.sum(forces * points, axis=1)
    np.fill_diagonal(gaps, 0.0)
    distance_sums = gaps.sum(axis=1) - size
    return StationarityReport(
        per_point_residual=residual,
        max_residual=float(residual.max()),
        lambda_estimates=lambdas,
        distance_sum_defect=distance_sums,
    )


def centroid_norm(config: SphericalConfig) -> float:
    return float(np.linalg.norm(centroid(config)))


def log_energy_difference(before: SphericalConfig, after: SphericalConfig) -> float:
    """E_log(after) - E_log(before), accurate for nearby configurations.

    Each squared distance is updated through the displacements, so the
    difference keeps relative precision far below the energy's rounding.
    """
    if before.points.shape != after.points.shape:
        raise InvalidArgumentError("configurations must have the same shape")
    upper_i, upper_j = np.triu_indices(before.size, k=1)
    x_diff = before.points[upper_i] - before.points[upper_j]
    shift = after.points - before.points
    shift_diff = shift[upper_i] - shift[upper_j]

    old_sq = np.sum(x_diff * x_diff, axis=1)
    delta_sq = np.sum(shift_diff * (2.0 * x_diff + shift_diff), axis=1)
    # Ordered pairs double the unordered sum; -log|.| halves the log of squares.
    return -float(np.sum(np.log1p(delta_sq / old_sq)))


def _check_singular(
    kind: PairPotential,
    inner: FloatArray,
    indices: tuple[np.ndarray, np.ndarray],
) -> None:
    if not kind.singular_at_one:
        return
    close = np.flatnonzero(1.0 - inner < SINGULAR_GAP)
    if close.size:
        pair = (int(indices[0][close[0]]), int(indices[1][close[0]]))
        raise SingularPairError(f"points {pair[0]} and {pair[1]} coincide", pair=pair)
