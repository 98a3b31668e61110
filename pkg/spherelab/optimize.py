"""Riemannian descent on the product of spheres and basin experiments.

Every point moves along its negative tangential gradient and is pulled back
to the sphere by radial normalization. Step lengths come from a
Barzilai-Borwein guess refined by Armijo backtracking.
"""

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from spherelab.errors import (
    ClassificationFailedError,
    InvalidArgumentError,
    SingularPairError,
    UnsupportedError,
)
from spherelab.geometry import SphericalConfig, normalize_rows, random_config
from spherelab.io import map_sharded
from spherelab.logging import LOGGER
from spherelab.potentials import PairPotential, energy, riemannian_grad_norm, tangent_gradient
from spherelab.stationarity import StationaryClass, classify

MIN_STEP = 1e-16
ROUNDING_BAND = 1e-14
MAX_STEP_RATIO = 1e3


class OptimizeOptions(BaseModel):
    """Settings of the descent loop, stored under [tool.spherelab.optimize]."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    max_iters: int = Field(default=100_000, gt=0, description="Iteration cap")
    grad_tol: float = Field(
        default=1e-11, gt=0, description="Stop once every tangential gradient is below this norm"
    )
    step0: float | None = Field(
        default=None, gt=0, description="First trial step; 0.1/(N-1) when unset"
    )
    factor: float = Field(default=0.5, description="Backtracking contraction factor")
    armijo: float = Field(default=1e-4, description="Sufficient-decrease constant")
    seed: int = Field(default=0, ge=0, description="Base seed of randomized starts")
    classify_tol: float = Field(default=1e-8, gt=0, description="Residual tolerance of the final classification")

    @field_validator("factor", "armijo")
    @classmethod
    def check_unit_interval(cls, value: float) -> float:
        if not 0.0 < value < 1.0:
            raise ValueError(f"must lie in (0, 1), got {value}")
        return value

    def updated(self, **changes: Any) -> "OptimizeOptions":
        """Validated copy with the non-None changes applied."""
        changes = {key: value for key, value in changes.items() if value is not None}
        return OptimizeOptions(**{**self.model_dump(), **changes})

    def initial_step(self, size: int) -> float:
        return self.step0 if self.step0 is not None else 0.1 / (size - 1)


@dataclass(frozen=True)
class OptimizeTrace:
    iterations: int
    energies: list[float]
    grad_norms: list[float]
    final_grad_norm: float
    final_class: StationaryClass | None
    converged: bool
    class_error: str | None = None

    @property
    def class_key(self) -> str:
        if self.final_class is not None:
            return self.final_class.key
        return self.class_error or "Unclassified"

    def rows(self) -> list[tuple[int, float, float]]:
        """(iteration, energy, grad_norm) per accepted iterate."""
        return [
            (index, value, norm)
            for index, (value, norm) in enumerate(zip(self.energies, self.grad_norms))
        ]


@dataclass(frozen=True)
class BasinTrial:
    trial: int
    class_key: str
    energy: float
    grad_norm: float
    iterations: int


@dataclass(frozen=True)
class BasinResult:
    dim: int
    kind: str
    trials: list[BasinTrial] = field(default_factory=list)

    @property
    def histogram(self) -> dict[str, int]:
        counts = Counter(trial.class_key for trial in self.trials)
        return dict(sorted(counts.items()))

    @property
    def lowest_energy(self) -> dict[str, float]:
        """Lowest final energy reached within each class."""
        lowest: dict[str, float] = {}
        for trial in self.trials:
            lowest[trial.class_key] = min(lowest.get(trial.class_key, math.inf), trial.energy)
        return dict(sorted(lowest.items()))

    @property
    def best_class(self) -> str:
        return min(self.trials, key=lambda trial: trial.energy).class_key


def minimize(
    config0: SphericalConfig,
    kind: PairPotential,
    opts: OptimizeOptions | None = None,
) -> tuple[SphericalConfig, OptimizeTrace]:
    """Descend from config0 until the gradient tolerance or the iteration cap.

    Steps that hit a coincident pair are rejected and shortened. When the
    decrease falls under the energy's rounding level, a step is still taken
    if it shrinks the gradient.
    """
    opts = opts or OptimizeOptions()
    dim, size = config0.dim, config0.size
    step0 = opts.initial_step(size)
    max_step = MAX_STEP_RATIO * step0

    points = np.array(config0.points)
    current = energy(config0, kind)
    gradient = tangent_gradient(config0, kind)
    energies = [current]
    grad_norms = [_max_row_norm(gradient)]
    previous: tuple[np.ndarray, np.ndarray] | None = None

    iterations = 0
    while iterations < opts.max_iters and grad_norms[-1] >= opts.grad_tol:
        trial = step0
        if previous is not None:
            trial = _barzilai_borwein(points - previous[0], gradient - previous[1], step0, max_step)

        slope = float(np.sum(gradient * gradient))
        band = ROUNDING_BAND * max(1.0, abs(current))
        accepted = None
        while trial >= MIN_STEP:
            candidate = SphericalConfig(
                dim, normalize_rows(points - trial * gradient), allow_coincident=True
            )
            try:
                value = energy(candidate, kind)
            except SingularPairError:
                trial *= opts.factor
                continue

            if value <= current - opts.armijo * trial * slope:
                accepted = (candidate, value, tangent_gradient(candidate, kind))
                break
            if value <= current + band:
                candidate_gradient = tangent_gradient(candidate, kind)
                if float(np.sum(candidate_gradient * candidate_gradient)) < slope:
                    accepted = (candidate, value, candidate_gradient)
                    break
            trial *= opts.factor

        if accepted is None:
            LOGGER.debug("line search underflow at iteration %d", iterations)
            break

        candidate, current, candidate_gradient = accepted
        previous = (points, gradient)
        points = np.array(candidate.points)
        gradient = candidate_gradient
        energies.append(current)
        grad_norms.append(_max_row_norm(gradient))
        iterations += 1

    final = config0.moved(points, label=f"minimized({config0.label})")
    final_grad = riemannian_grad_norm(final, kind)
    converged = final_grad < opts.grad_tol
    final_class: StationaryClass | None = None
    class_error = None
    try:
        final_class = classify(final, opts.classify_tol)
    except (UnsupportedError, ClassificationFailedError) as exc:
        class_error = type(exc).__name__.removesuffix("Error")
        LOGGER.warning("final configuration left unclassified: %s", exc)

    LOGGER.debug(
        "minimize: %d iterations, energy %.15g, grad %.3e, class %s",
        iterations, current, final_grad, final_class,
    )
    return final, OptimizeTrace(
        iterations=iterations,
        energies=energies,
        grad_norms=grad_norms,
        final_grad_norm=final_grad,
        final_class=final_class,
        converged=converged,
        class_error=class_error,
    )


def trial_seed(seed: int, trial: int) -> np.random.SeedSequence:
    """Independent stream for one trial, fixed by (seed, trial)."""
    return np.random.SeedSequence([seed, trial])


def basin_experiment(
    dim: int,
    trials: int,
    kind: PairPotential,
    opts: OptimizeOptions | None = None,
    jobs: int = 1,
) -> BasinResult:
    """Minimize from `trials` uniform random starts of d+2 points.

    Each trial draws from its own seed stream, so results do not depend on
    `jobs` or on scheduling.
    """
    opts = opts or OptimizeOptions()
    if trials < 1:
        raise InvalidArgumentError(f"trials must be at least 1, got {trials}")

    def run_trial(trial: int) -> BasinTrial:
        start = random_config(dim, dim + 2, trial_seed(opts.seed, trial))
        _, trace = minimize(start, kind, opts)
        LOGGER.debug("basin trial %d -> %s", trial, trace.class_key)
        return BasinTrial(
            trial=trial,
            class_key=trace.class_key,
            energy=trace.energies[-1],
            grad_norm=trace.final_grad_norm,
            iterations=trace.iterations,
        )

    results = map_sharded(run_trial, list(range(trials)), jobs)
    return BasinResult(dim=dim, kind=str(kind), trials=results)


def _barzilai_borwein(
    displacement: np.ndarray,
    gradient_change: np.ndarray,
    fallback: float,
    max_step: float,
) -> float:
    curvature = float(np.sum(displacement * gradient_change))
    if curvature <= 0.0:
        return fallback
    return min(float(np.sum(displacement * displacement)) / curvature, max_step)


def _max_row_norm(gradient: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(gradient, axis=1)))
