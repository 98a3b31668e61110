"""Rank-one structure of stationary (d+2)-point configurations and their taxonomy.

With r_ij = 1 - x_i . x_j, the matrix B holds b_ij = 1/r_ij off the diagonal
and b_ii = N-1 - sum_j b_ij; A = c - B with c = (N-1)/N. At a non-degenerate
stationary configuration of d+2 points A has rank one, A = a a^T, and the
factor a determines the structure: zero entries are apexes, and otherwise
the positive and negative entries are two orthogonal regular simplexes.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from spherelab.errors import (
    ClassificationFailedError,
    NotApplicableError,
    SingularPairError,
    UnsupportedError,
)
from spherelab.geometry import (
    FloatArray,
    PartitionType,
    SphericalConfig,
    gram,
    normalize_rows,
    span_rank,
)
from spherelab.potentials import SINGULAR_GAP, log_force_report

RANK_TOL = 1e-8
ZERO_FACTOR_TOL = 1e-6
DEFAULT_TOL = 1e-8

_EMPTY = np.zeros(0)


@dataclass(frozen=True, eq=False)
class AMatrixDiagnostics:
    """The B and A matrices with the identities built on the rank-one factor.

    `a`, `Q`, `R`, `S`, `T` are empty and `min_slack` is NaN when A is not
    of rank one.
    """

    c: float
    B: FloatArray
    A: FloatArray
    rank_A: int
    a: FloatArray = field(default_factory=lambda: _EMPTY)
    Q: FloatArray = field(default_factory=lambda: _EMPTY)
    R: FloatArray = field(default_factory=lambda: _EMPTY)
    S: FloatArray = field(default_factory=lambda: _EMPTY)
    T: FloatArray = field(default_factory=lambda: _EMPTY)
    min_slack: float = math.nan

    @property
    def size(self) -> int:
        return int(self.A.shape[0])

    @property
    def has_factor(self) -> bool:
        return self.rank_A == 1 and self.a.size == self.size

    @property
    def zero_threshold(self) -> float:
        return ZERO_FACTOR_TOL * math.sqrt(self.c)

    def zero_indices(self) -> FloatArray:
        """Indices with a_i = 0, the points equidistant to all others."""
        if not self.has_factor:
            return np.zeros(0, dtype=int)
        return np.flatnonzero(np.abs(self.a) < self.zero_threshold)

    def factor_defect(self) -> float:
        """max |A_ij - a_i a_j|."""
        if not self.has_factor:
            return math.inf
        return float(np.max(np.abs(self.A - np.outer(self.a, self.a))))


@dataclass(frozen=True)
class ARankReport:
    rank_A: int
    bound: int


@dataclass(frozen=True, eq=False)
class FactorDefects:
    """Per-index defects Q_i - N, R_i, S_i - 1, T_i - (N-2)."""

    q: FloatArray
    r: FloatArray
    s: FloatArray
    t: FloatArray
    min_slack: float
    sqrt_c_margin: float

    def max_defect(self) -> float:
        return float(max(np.max(np.abs(values)) for values in (self.q, self.r, self.s, self.t)))


@dataclass(frozen=True)
class ConvexityPoint:
    t: float
    value: float
    second_derivative: float


@dataclass(frozen=True)
class StationaryClass:
    """Classification verdict; diagnostics ride along without affecting equality."""

    diagnostics: AMatrixDiagnostics | None = field(
        default=None, compare=False, repr=False, kw_only=True
    )

    @property
    def label(self) -> str:
        raise NotImplementedError

    @property
    def key(self) -> str:
        """Histogram key: the label, without per-run numbers."""
        return self.label

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class TwoSimplex(StationaryClass):
    m: int
    n: int
    members: tuple[tuple[int, ...], tuple[int, ...]] = field(
        default=((), ()), compare=False, repr=False
    )

    def __post_init__(self) -> None:
        if not self.m >= self.n >= 2:
            raise ValueError(f"TwoSimplex needs m >= n >= 2, got ({self.m}, {self.n})")

    @property
    def label(self) -> str:
        return f"TwoSimplex({self.m},{self.n})"


@dataclass(frozen=True)
class Pyramid(StationaryClass):
    partition: PartitionType

    def __post_init__(self) -> None:
        if not self.partition.has_apex:
            raise ValueError(f"Pyramid partition {self.partition} has no apex block")

    @property
    def label(self) -> str:
        return f"Pyramid({self.partition})"


@dataclass(frozen=True)
class Degenerate(StationaryClass):
    spanned_dim: int

    @property
    def label(self) -> str:
        return f"Degenerate({self.spanned_dim})"


@dataclass(frozen=True)
class NonStationary(StationaryClass):
    max_residual: float

    @property
    def label(self) -> str:
        return f"NonStationary({self.max_residual:.3e})"

    @property
    def key(self) -> str:
        return "NonStationary"


def build_diagnostics(config: SphericalConfig) -> AMatrixDiagnostics:
    """B, A, rank and the rank-one factor for a configuration of d+2 points."""
    if config.size != config.dim + 2:
        raise UnsupportedError(
            f"rank-one diagnostics need N = d+2, got N={config.size}, d={config.dim}"
        )
    c, b_matrix, a_matrix = _b_and_a(config)
    rank = numerical_rank(a_matrix)
    if rank != 1:
        return AMatrixDiagnostics(c=c, B=b_matrix, A=a_matrix, rank_A=rank)

    a = _rank_one_factor(a_matrix, c)
    q, r, s, t, min_slack = _factor_sums(a, c)
    return AMatrixDiagnostics(
        c=c, B=b_matrix, A=a_matrix, rank_A=rank, a=a, Q=q, R=r, S=s, T=t, min_slack=min_slack
    )


def a_matrix_rank(config: SphericalConfig) -> ARankReport:
    """Rank of A for any N, with the bound N-d-1 that holds at stationarity."""
    _, _, a_matrix = _b_and_a(config)
    return ARankReport(rank_A=numerical_rank(a_matrix), bound=config.size - config.dim - 1)


def numerical_rank(matrix: FloatArray, rel_tol: float = RANK_TOL) -> int:
    singular = np.linalg.svd(matrix, compute_uv=False)
    threshold = rel_tol * max(float(singular[0]) if singular.size else 0.0, 1.0)
    return int(np.count_nonzero(singular > threshold))


def factor_identities(diag: AMatrixDiagnostics) -> FactorDefects:
    """Defects of Q_i = N, R_i = 0, S_i = 1, T_i = N-2 plus the slack bounds."""
    if not diag.has_factor:
        raise NotApplicableError(f"identities need rank(A) = 1, got {diag.rank_A}")
    size = diag.size
    return FactorDefects(
        q=diag.Q - size,
        r=diag.R.copy(),
        s=diag.S - 1.0,
        t=diag.T - (size - 2),
        min_slack=diag.min_slack,
        sqrt_c_margin=float(np.max(np.abs(diag.a)) - math.sqrt(diag.c)),
    )


def convex_function(a: FloatArray, c: float, t: FloatArray) -> tuple[FloatArray, FloatArray]:
    """F(t) = sum_j (c - a_j^2)/(c - t a_j) and its second derivative."""
    t = np.asarray(t, dtype=np.float64)[..., None]
    weights = c - a * a
    denominator = c - t * a
    value = np.sum(weights / denominator, axis=-1)
    second = 2.0 * np.sum(weights * a * a / denominator**3, axis=-1)
    return value, second


def convexity_scan(diag: AMatrixDiagnostics, grid_size: int = 1001) -> list[ConvexityPoint]:
    """F and F'' on an open grid over (-sqrt(c), sqrt(c))."""
    if not diag.has_factor:
        raise NotApplicableError(f"convexity scan needs rank(A) = 1, got {diag.rank_A}")
    bound = math.sqrt(diag.c)
    grid = np.linspace(-bound, bound, grid_size + 2)[1:-1]
    values, seconds = convex_function(diag.a, diag.c, grid)
    return [
        ConvexityPoint(float(t), float(value), float(second))
        for t, value, second in zip(grid, values, seconds)
    ]


def convex_values(diag: AMatrixDiagnostics) -> FloatArray:
    """F(a_i) for every i; equal to N-1 at a stationary configuration."""
    if not diag.has_factor:
        raise NotApplicableError(f"F(a_i) needs rank(A) = 1, got {diag.rank_A}")
    values, _ = convex_function(diag.a, diag.c, diag.a)
    return values


def classify(config: SphericalConfig, tol: float = DEFAULT_TOL) -> StationaryClass:
    """Place a configuration in the stationary taxonomy.

    Stationarity is tested first, then degeneracy; apexes are peeled
    recursively and the remaining structure is verified against the Gram
    matrix rather than assumed.
    """
    report = log_force_report(config)
    if report.max_residual > tol:
        return NonStationary(report.max_residual)

    rank = span_rank(config)
    if rank < config.dim:
        return Degenerate(rank)

    diag = build_diagnostics(config)
    if diag.rank_A != 1:
        raise ClassificationFailedError(
            f"stationary configuration has rank(A) = {diag.rank_A}, expected 1", diag
        )

    structure_tol = math.sqrt(tol)
    apexes = diag.zero_indices()
    if apexes.size:
        return _classify_pyramid(config, diag, int(apexes[0]), tol, structure_tol)
    return _classify_two_simplex(config, diag, structure_tol)


def two_simplex_members(
    config: SphericalConfig, tol: float = DEFAULT_TOL
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Index blocks (larger first) of a configuration that classifies as a two-simplex."""
    verdict = classify(config, tol)
    if not isinstance(verdict, TwoSimplex):
        raise NotApplicableError(f"configuration is {verdict}, not a two-simplex split")
    return verdict.members


def peel_apex(config: SphericalConfig, apex: int) -> SphericalConfig:
    """Project the other points to the apex's equatorial hyperplane.

    With x_i = (y_i, -1/(N-1)) in a frame whose pole is the apex, the
    reduced points are z_i = (N-1) y_i / sqrt(N(N-2)) on S^(d-2); rows are
    renormalized to absorb residual error in the heights.
    """
    size = config.size
    basis = null_space(config.points[apex][None, :])
    others = np.delete(config.points, apex, axis=0)
    reduced = (size - 1) * (others @ basis) / math.sqrt(size * (size - 2))
    return SphericalConfig(config.dim - 1, normalize_rows(reduced), label=f"peeled({config.label})")


def _classify_pyramid(
    config: SphericalConfig,
    diag: AMatrixDiagnostics,
    apex: int,
    tol: float,
    structure_tol: float,
) -> Pyramid:
    size = config.size
    inner = np.delete(gram(config)[apex], apex)
    deviation = float(np.max(np.abs(inner + 1.0 / (size - 1))))
    if deviation > structure_tol:
        raise ClassificationFailedError(
            f"point {apex} has a_i = 0 but is not equidistant (deviation {deviation:.3e})", diag
        )

    below = classify(peel_apex(config, apex), tol)
    if isinstance(below, TwoSimplex):
        return Pyramid(PartitionType((1, below.m, below.n)), diagnostics=diag)
    if isinstance(below, Pyramid):
        return Pyramid(PartitionType((1, *below.partition.blocks)), diagnostics=diag)
    raise ClassificationFailedError(f"configuration below apex {apex} classified as {below}", diag)


def _classify_two_simplex(
    config: SphericalConfig,
    diag: AMatrixDiagnostics,
    structure_tol: float,
) -> TwoSimplex:
    a = diag.a
    positive = np.flatnonzero(a > 0)
    negative = np.flatnonzero(a < 0)
    if positive.size < 2 or negative.size < 2:
        raise ClassificationFailedError(
            f"factor signs split {positive.size}/{negative.size}; both blocks need 2 points", diag
        )
    for group in (positive, negative):
        spread = float(np.ptp(a[group]))
        if spread > structure_tol:
            raise ClassificationFailedError(
                f"factor entries of one sign differ by {spread:.3e}", diag
            )

    inner = gram(config)
    for group in (positive, negative):
        block = inner[np.ix_(group, group)]
        off_diagonal = block[~np.eye(group.size, dtype=bool)]
        deviation = float(np.max(np.abs(off_diagonal + 1.0 / (group.size - 1))))
        if deviation > structure_tol:
            raise ClassificationFailedError(
                f"block of {group.size} points is not a regular simplex (deviation {deviation:.3e})",
                diag,
            )
    cross = float(np.max(np.abs(inner[np.ix_(positive, negative)])))
    if cross > structure_tol:
        raise ClassificationFailedError(f"blocks are not orthogonal (max |x_i.x_j| {cross:.3e})", diag)

    first, second = sorted((positive, negative), key=lambda group: (-group.size, group[0]))
    return TwoSimplex(
        int(first.size),
        int(second.size),
        members=(tuple(int(i) for i in first), tuple(int(i) for i in second)),
        diagnostics=diag,
    )


def _b_and_a(config: SphericalConfig) -> tuple[float, FloatArray, FloatArray]:
    size = config.size
    gaps = 1.0 - gram(config)
    off_diagonal = ~np.eye(size, dtype=bool)
    if np.any(gaps[off_diagonal] < SINGULAR_GAP):
        raise SingularPairError("coincident points make B undefined")

    b_matrix = np.zeros_like(gaps)
    b_matrix[off_diagonal] = 1.0 / gaps[off_diagonal]
    np.fill_diagonal(b_matrix, (size - 1) - b_matrix.sum(axis=1))
    c = (size - 1) / size
    return c, b_matrix, c - b_matrix


def _rank_one_factor(a_matrix: FloatArray, c: float) -> FloatArray:
    eigenvalues, eigenvectors = np.linalg.eigh(a_matrix)
    dominant = int(np.argmax(np.abs(eigenvalues)))
    factor = math.sqrt(max(float(eigenvalues[dominant]), 0.0)) * eigenvectors[:, dominant]
    # Sign convention: the first nonzero entry is positive.
    nonzero = np.flatnonzero(np.abs(factor) >= ZERO_FACTOR_TOL * math.sqrt(c))
    if nonzero.size and factor[nonzero[0]] < 0:
        factor = -factor
    return factor


def _factor_sums(a: FloatArray, c: float) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray, float]:
    size = a.size
    slack = c - np.outer(a, a)
    off_diagonal = ~np.eye(size, dtype=bool)
    inverse = np.where(off_diagonal, 1.0 / np.where(off_diagonal, slack, 1.0), 0.0)

    q = inverse.sum(axis=1)
    r = inverse @ a
    s = (inverse * (a * a)[None, :]).sum(axis=1) - a * r
    t = (inverse * (c - a * a)[None, :]).sum(axis=1)
    min_slack = float(np.min(slack[off_diagonal])) - 0.5
    return q, r, s, t, min_slack
