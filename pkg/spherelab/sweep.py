"""Riesz s-energy comparison of the triangular bi-pyramid and the square pyramid.

The square pyramid is optimized over its base height at every s; the
crossover is the s where the two energies cross.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect, brentq

from spherelab.errors import BracketInvalidError, InvalidArgumentError
from spherelab.geometry import PartitionType, SphericalConfig, orthogonal_simplexes, square_pyramid_fp
from spherelab.io import map_sharded
from spherelab.logging import LOGGER
from spherelab.potentials import PairPotential, RieszPotential, energy, euclidean_gradient

# Open interval (-1, 1) for the base height; the energy blows up at both ends.
HEIGHT_MARGIN = 1e-6
HEIGHT_BRACKET = (-1.0 + HEIGHT_MARGIN, 1.0 - HEIGHT_MARGIN)
HEIGHT_XTOL = 1e-15
CROSSOVER_XTOL = 1e-6


@dataclass(frozen=True)
class SweepRow:
    s: float
    e_tbp: float
    t_star: float
    e_fp_opt: float

    @property
    def gap(self) -> float:
        """E_TBP - E_FP at the optimal height; negative while TBP is lower."""
        return self.e_tbp - self.e_fp_opt


@dataclass(frozen=True)
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)
    crossover: float | None = None


def tbp_config() -> SphericalConfig:
    return orthogonal_simplexes(PartitionType((3, 2))).with_label("TBP")


def fp_optimal_height(s: float) -> tuple[float, float]:
    """Base height of the square pyramid minimizing the Riesz s-energy.

    The minimizer is the root of the height derivative, which is negative
    near t = -1 and positive near t = 1.

    :return: (t_star, E_FP_opt)
    """
    kind = _riesz(s)
    t_star = float(brentq(fp_height_derivative, *HEIGHT_BRACKET, args=(kind,), xtol=HEIGHT_XTOL))
    return t_star, energy(square_pyramid_fp(t_star), kind)


def fp_height_derivative(t: float, kind: PairPotential) -> float:
    """d/dt of the square-pyramid energy at base height t."""
    config = square_pyramid_fp(t)
    velocity = np.zeros_like(config.points)
    # Base points (r cos phi, r sin phi, t) with r = sqrt(1 - t^2).
    velocity[1:, :2] = -t / (1.0 - t * t) * config.points[1:, :2]
    velocity[1:, 2] = 1.0
    return float(np.sum(euclidean_gradient(config, kind) * velocity))


def riesz_gap(s: float) -> float:
    """E_s(TBP) - E_s(FP at its optimal height)."""
    _, fp_energy = fp_optimal_height(s)
    return energy(tbp_config(), _riesz(s)) - fp_energy


def find_crossover(s_lo: float, s_hi: float, xtol: float = CROSSOVER_XTOL) -> float:
    """Bisect riesz_gap for its sign change on [s_lo, s_hi]."""
    if not 0.0 < s_lo < s_hi:
        raise InvalidArgumentError(f"bracket must satisfy 0 < lo < hi, got [{s_lo}, {s_hi}]")
    gap_lo, gap_hi = riesz_gap(s_lo), riesz_gap(s_hi)
    if gap_lo == 0.0:
        return s_lo
    if gap_hi == 0.0:
        return s_hi
    if np.sign(gap_lo) == np.sign(gap_hi):
        raise BracketInvalidError(
            f"riesz gap has the same sign at s={s_lo} ({gap_lo:.3e}) and s={s_hi} ({gap_hi:.3e})"
        )
    return float(bisect(riesz_gap, s_lo, s_hi, xtol=xtol))


def sweep_row(s: float) -> SweepRow:
    t_star, fp_energy = fp_optimal_height(s)
    row = SweepRow(s=s, e_tbp=energy(tbp_config(), _riesz(s)), t_star=t_star, e_fp_opt=fp_energy)
    LOGGER.debug("sweep s=%g gap=%.6e t*=%.9f", s, row.gap, t_star)
    return row


def sweep(s_from: float, s_to: float, step: float, jobs: int = 1) -> SweepResult:
    """Tabulate the comparison on a grid and locate the first crossover in it."""
    if step <= 0:
        raise InvalidArgumentError(f"step must be positive, got {step}")
    if not 0.0 < s_from <= s_to:
        raise InvalidArgumentError(f"grid must satisfy 0 < from <= to, got [{s_from}, {s_to}]")

    count = int(math.floor((s_to - s_from) / step + 1e-9)) + 1
    grid = [round(s_from + index * step, 12) for index in range(count)]
    rows = map_sharded(sweep_row, grid, jobs)

    crossover = None
    for before, after in zip(rows, rows[1:]):
        if before.gap == 0.0:
            crossover = before.s
            break
        if np.sign(before.gap) != np.sign(after.gap):
            crossover = find_crossover(before.s, after.s)
            break
    return SweepResult(rows=rows, crossover=crossover)


def _riesz(s: float) -> RieszPotential:
    if not s > 0:
        raise InvalidArgumentError(f"the comparison needs s > 0, got {s}")
    return RieszPotential(s)
