"""Constructive perturbations and the second-order energy expansion.

Three families live here: the rotation that lowers the energy of any
degenerate configuration, the one-parameter path through a {1,k,m} pyramid
that joins the {k+1,m} and {k,m+1} splits, and the quadratic form that
governs the energy change around a two-simplex split together with the two
matrix inequalities that make it nonnegative.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space, orth

from spherelab.errors import InvalidArgumentError, NotApplicableError, NotDegenerateError
from spherelab.geometry import (
    FloatArray,
    PartitionType,
    SphericalConfig,
    gram,
    normalize_rows,
    orthogonal_simplexes,
    span_rank,
)
from spherelab.logging import LOGGER
from spherelab.potentials import LogPotential, PairPotential, energy, log_energy_difference
from spherelab.stationarity import two_simplex_members

SeedLike = int | np.random.SeedSequence | None
Members = tuple[tuple[int, ...], tuple[int, ...]]

EDGE_TOL = 1e-9
FEASIBILITY_TOL = 1e-10
PATH_SLACK = 1e-15


@dataclass(frozen=True, eq=False)
class PerturbationBundle:
    """Per-point displacements h_i, one row per point."""

    h: FloatArray

    def __post_init__(self) -> None:
        h = np.array(self.h, dtype=np.float64)
        if h.ndim != 2:
            raise InvalidArgumentError(f"bundle must be a 2-d array, got shape {h.shape}")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def max_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.h, axis=1)))

    def scaled_to(self, eps: float) -> "PerturbationBundle":
        """Rescale so the largest displacement has norm eps."""
        largest = self.max_norm
        if largest == 0.0:
            return self
        return PerturbationBundle(self.h * (eps / largest))

    def tangent_to(self, config: SphericalConfig) -> "PerturbationBundle":
        """Remove each displacement's component along its base point."""
        _check_shape(config, self)
        radial = np.sum(self.h * config.points, axis=1, keepdims=True)
        return PerturbationBundle(self.h - radial * config.points)

    def apply(self, config: SphericalConfig) -> SphericalConfig:
        """y_i = normalize(x_i + h_i)."""
        _check_shape(config, self)
        return config.moved(normalize_rows(config.points + self.h), label=f"perturbed({config.label})")

    @classmethod
    def between(cls, before: SphericalConfig, after: SphericalConfig) -> "PerturbationBundle":
        """The displacements y_i - x_i, which satisfy 2 x_i.h_i = -|h_i|^2."""
        return cls(after.points - before.points)


@dataclass(frozen=True, eq=False)
class BundleSplit:
    """Block coordinates of a two-simplex split and a bundle over it.

    Points of the first block are x_i = (p_i, 0) with h_i = (a_i, b_i);
    points of the second are x_j = (0, q_j) with h_j = (c_j, d_j).
    """

    p: FloatArray
    a: FloatArray
    b: FloatArray
    q: FloatArray
    c: FloatArray
    d: FloatArray

    @property
    def m(self) -> int:
        return int(self.p.shape[0])

    @property
    def n(self) -> int:
        return int(self.q.shape[0])


@dataclass(frozen=True)
class QuadraticForm:
    """D = |sum h|^2 + D1 + D2 + D3."""

    total: float
    d1: float
    d2: float
    d3: float
    centroid_term: float


@dataclass(frozen=True)
class SecondOrderSample:
    eps: float
    energy_delta: float
    quadratic: float
    remainder: float

    @property
    def ratio(self) -> float:
        """|2 dE - D| / eps^3."""
        return abs(self.remainder) / self.eps**3


@dataclass(frozen=True)
class PathSample:
    t: float
    energy: float
    energy_direct: float
    derivative: float
    derivative_sign: int


@dataclass(frozen=True, eq=False)
class EscapeResult:
    config: SphericalConfig
    energy_delta: float
    pair: tuple[int, int]
    witness: int


def degenerate_escape(
    config: SphericalConfig,
    kind: PairPotential,
    theta: float,
) -> EscapeResult:
    """Rotate two points out of the spanned subspace, lowering the energy.

    A pair x1, x2 with a witness x3 satisfying x1.x3 != x2.x3 is written as
    x1,2 = r e1 +- s e2; rotating e2 toward a normal e_d by theta keeps
    x1.x2 and shrinks every |x_k.x1 - x_k.x2|, which lowers the energy of
    any strictly convex potential.
    """
    rank = span_rank(config)
    if rank >= config.dim:
        raise NotDegenerateError(f"configuration spans R^{config.dim}")
    if config.size < config.dim + 2:
        raise NotApplicableError(
            f"escape needs N >= d+2, got N={config.size} for d={config.dim}"
        )
    if not kind.is_strictly_convex:
        raise NotApplicableError(f"{kind} is not strictly convex in the inner product")
    if not 0.0 < theta < math.pi:
        raise InvalidArgumentError(f"rotation angle must lie in (0, pi), got {theta}")

    first, second, witness = _unequal_edges(config)
    x1, x2 = config.points[first], config.points[second]
    r = np.linalg.norm(x1 + x2) / 2.0
    s = np.linalg.norm(x1 - x2) / 2.0
    e1 = (x1 + x2) / (2.0 * r)
    e2 = (x1 - x2) / (2.0 * s)
    normal = null_space(config.points)[:, 0]

    swing = math.cos(theta) * e2 + math.sin(theta) * normal
    points = np.array(config.points)
    points[first] = r * e1 + s * swing
    points[second] = r * e1 - s * swing
    escaped = config.moved(normalize_rows(points), label=f"escaped({config.label})")

    delta = energy(escaped, kind) - energy(config, kind)
    LOGGER.debug(
        "escape rotated pair (%d, %d) with witness %d by %.3f: delta %.6e",
        first, second, witness, theta, delta,
    )
    return EscapeResult(escaped, delta, (first, second), witness)


def pyramid_path(k: int, m: int, t: float) -> SphericalConfig:
    """The {1,k,m} pyramid with its two base simplexes moved in height.

    The k-block sits at height -1/(k+m) - mt and the m-block at
    -1/(k+m) + kt, both rescaled to stay on S^(k+m-2). Points are ordered
    apex, k-block, m-block.
    """
    low, high = path_bracket(k, m)
    if not low - PATH_SLACK <= t <= high + PATH_SLACK:
        raise InvalidArgumentError(f"t={t} lies outside the path bracket [{low}, {high}]")

    u = 1.0 / (k + m) + m * t
    v = 1.0 / (k + m) - k * t
    base = orthogonal_simplexes(PartitionType((k, m))).points
    dim = k + m - 1

    points = np.zeros((k + m + 1, dim))
    points[0, -1] = 1.0
    points[1 : k + 1, :-1] = math.sqrt(1.0 - u**2) * base[:k]
    points[1 : k + 1, -1] = -u
    points[k + 1 :, :-1] = math.sqrt(1.0 - v**2) * base[k:]
    points[k + 1 :, -1] = -v
    return SphericalConfig(dim, points, label=f"pyramid_path({k}, {m}, {t:g})")


def path_bracket(k: int, m: int) -> tuple[float, float]:
    """Closed range of t joining the {k, m+1} and {k+1, m} splits."""
    if k < 2 or m < 2:
        raise InvalidArgumentError(f"pyramid path needs k, m >= 2, got ({k}, {m})")
    return -1.0 / (m * (k + m)), 1.0 / (k * (k + m))


def pyramid_energy(k: int, m: int, t: float) -> PathSample:
    """Closed-form log energy along the pyramid path, with its derivative.

    f(t) sums -log(1 - x_i.x_j) over unordered pairs; the reported energy
    subtracts the constant N(N-1) log(2)/2 that separates f from the
    ordered-pair -log|x - y| energy.
    """
    config = pyramid_path(k, m, t)
    size = k + m + 1
    u = 1.0 / (k + m) + m * t
    v = 1.0 / (k + m) - k * t

    closed = (
        k * (k + 1) / 2 * -math.log1p(u)
        + k * (k - 1) / 2 * (-math.log1p(-u) + math.log((k - 1) / k))
        + m * (m + 1) / 2 * -math.log1p(v)
        + m * (m - 1) / 2 * (-math.log1p(-v) + math.log((m - 1) / m))
        + k * m * -math.log1p(-u * v)
    )
    shift = size * (size - 1) * math.log(2.0) / 2.0

    p, q = u, -v
    derivative = (
        k * m * (m + k) * t * p * q / (1.0 + p * q)
        * (m / (1.0 - p * p) + k / (1.0 - q * q))
    )
    return PathSample(
        t=t,
        energy=closed - shift,
        energy_direct=energy(config, LogPotential()),
        derivative=derivative,
        derivative_sign=int(np.sign(t * p * q)),
    )


def split_bundle(
    config: SphericalConfig,
    bundle: PerturbationBundle,
    members: Members | None = None,
) -> BundleSplit:
    """Express points and displacements in orthonormal bases of the two blocks."""
    _check_shape(config, bundle)
    first, second = members if members is not None else two_simplex_members(config)
    if len(first) < 2 or len(second) < 2:
        raise NotApplicableError("a two-simplex split needs two blocks of at least two points")
    points = config.points
    first_idx, second_idx = list(first), list(second)
    first_basis = orth(points[first_idx].T)
    second_basis = orth(points[second_idx].T)
    if first_basis.shape[1] + second_basis.shape[1] != config.dim:
        raise NotApplicableError("blocks do not span complementary subspaces")

    return BundleSplit(
        p=points[first_idx] @ first_basis,
        a=bundle.h[first_idx] @ first_basis,
        b=bundle.h[first_idx] @ second_basis,
        q=points[second_idx] @ second_basis,
        c=bundle.h[second_idx] @ first_basis,
        d=bundle.h[second_idx] @ second_basis,
    )


def quadratic_form_D(
    config: SphericalConfig,
    bundle: PerturbationBundle,
    members: Members | None = None,
) -> QuadraticForm:
    """Second-order part of 2(E(Y) - E(X)) around a two-simplex split."""
    split = split_bundle(config, bundle, members)
    m, n = split.m, split.n

    within_first = _symmetric_pair_sum(split.p, split.a)
    within_second = _symmetric_pair_sum(split.q, split.d)
    cross = split.p @ split.c.T + (split.q @ split.b.T).T

    sum_a = _norm_sq(split.a.sum(axis=0))
    sum_b = _norm_sq(split.b.sum(axis=0))
    sum_c = _norm_sq(split.c.sum(axis=0))
    sum_d = _norm_sq(split.d.sum(axis=0))

    d1 = ((m - 1) / m) ** 2 * within_first - sum_a / m
    d2 = ((n - 1) / n) ** 2 * within_second - sum_d / n
    d3 = float(np.sum(cross * cross)) - sum_b / m - sum_c / n
    centroid_term = _norm_sq(bundle.h.sum(axis=0))
    return QuadraticForm(
        total=centroid_term + d1 + d2 + d3,
        d1=d1,
        d2=d2,
        d3=d3,
        centroid_term=centroid_term,
    )


def second_order_check(
    config: SphericalConfig,
    bundle: PerturbationBundle,
    eps_list: list[float],
) -> list[SecondOrderSample]:
    """Compare 2 dE with D for the bundle scaled to each eps.

    The bundle is made tangent, scaled, and applied by radial projection;
    D is then evaluated on the realized displacements y_i - x_i.
    """
    members = two_simplex_members(config)
    tangent = bundle.tangent_to(config)
    samples = []
    for eps in eps_list:
        moved = tangent.scaled_to(eps).apply(config)
        realized = PerturbationBundle.between(config, moved)
        delta = log_energy_difference(config, moved)
        quadratic = quadratic_form_D(config, realized, members).total
        samples.append(
            SecondOrderSample(
                eps=eps,
                energy_delta=delta,
                quadratic=quadratic,
                remainder=2.0 * delta - quadratic,
            )
        )
    return samples


def quartic_term(
    config: SphericalConfig,
    bundle: PerturbationBundle,
    members: Members | None = None,
) -> float:
    """Fourth-order energy sum left when every quadratic term vanishes.

    Cross pairs contribute the square of the full displacement product
    h_i . h_j = a_i . c_j + b_i . d_j, so the blocks may differ in size.
    """
    split = split_bundle(config, bundle, members)
    m, n = split.m, split.n
    aa = split.a @ split.a.T
    dd = split.d @ split.d.T
    cross = split.a @ split.c.T + split.b @ split.d.T
    np.fill_diagonal(aa, 0.0)
    np.fill_diagonal(dd, 0.0)
    return float(
        (m - 1) ** 2 / (2 * m**2) * np.sum(aa * aa)
        + (n - 1) ** 2 / (2 * n**2) * np.sum(dd * dd)
        + np.sum(cross * cross)
    )


def centered_matrix_gap(matrix: FloatArray) -> float:
    """sum_{i<j} (M_ij + M_ji)^2 - sum_j (column sum j)^2 / (m-2).

    Nonnegative for every m x m matrix with zero diagonal and zero row sums.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {matrix.shape}")
    size = matrix.shape[0]
    if size < 3:
        raise InvalidArgumentError(f"the inequality needs m >= 3, got {size}")
    scale = max(1.0, float(np.max(np.abs(matrix))))
    if np.max(np.abs(np.diag(matrix))) > FEASIBILITY_TOL * scale:
        raise InvalidArgumentError("matrix diagonal must vanish")
    if np.max(np.abs(matrix.sum(axis=1))) > FEASIBILITY_TOL * scale:
        raise InvalidArgumentError("matrix row sums must vanish")

    symmetric = matrix + matrix.T
    upper = np.triu_indices(size, k=1)
    columns = matrix.sum(axis=0)
    return float(np.sum(symmetric[upper] ** 2) - np.sum(columns**2) / (size - 2))


def transpose_pair_gap(f_matrix: FloatArray, g_matrix: FloatArray) -> float:
    """sum_ij (F_ij + G_ji)^2 - |col sums F|^2 / m - |col sums G|^2 / n.

    F is m x n and G is n x m, both with zero row sums.
    """
    f_matrix = np.asarray(f_matrix, dtype=np.float64)
    g_matrix = np.asarray(g_matrix, dtype=np.float64)
    if f_matrix.ndim != 2 or g_matrix.shape != f_matrix.T.shape:
        raise InvalidArgumentError(
            f"expected F of shape (m, n) and G of shape (n, m), got {f_matrix.shape} and {g_matrix.shape}"
        )
    m, n = f_matrix.shape
    scale = max(1.0, float(np.max(np.abs(f_matrix), initial=0.0)), float(np.max(np.abs(g_matrix), initial=0.0)))
    for name, matrix in (("F", f_matrix), ("G", g_matrix)):
        if np.max(np.abs(matrix.sum(axis=1))) > FEASIBILITY_TOL * scale:
            raise InvalidArgumentError(f"row sums of {name} must vanish")

    combined = f_matrix + g_matrix.T
    y = f_matrix.sum(axis=0)
    z = g_matrix.sum(axis=0)
    return float(np.sum(combined**2) - np.sum(y**2) / m - np.sum(z**2) / n)


def random_centered_matrix(size: int, seed: SeedLike = None) -> FloatArray:
    """Gaussian matrix projected to zero diagonal and zero row sums."""
    if size < 3:
        raise InvalidArgumentError(f"the inequality needs m >= 3, got {size}")
    rng = np.random.default_rng(seed)
    matrix = rng.standard_normal((size, size))
    np.fill_diagonal(matrix, 0.0)
    matrix -= matrix.sum(axis=1, keepdims=True) / (size - 1)
    np.fill_diagonal(matrix, 0.0)
    return matrix


def random_transpose_pair(m: int, n: int, seed: SeedLike = None) -> tuple[FloatArray, FloatArray]:
    """Gaussian F (m x n) and G (n x m) with zero row sums."""
    if m < 1 or n < 1:
        raise InvalidArgumentError(f"matrix sizes must be positive, got ({m}, {n})")
    rng = np.random.default_rng(seed)
    f_matrix = rng.standard_normal((m, n))
    g_matrix = rng.standard_normal((n, m))
    f_matrix -= f_matrix.mean(axis=1, keepdims=True)
    g_matrix -= g_matrix.mean(axis=1, keepdims=True)
    return f_matrix, g_matrix


def random_tangent_bundle(
    config: SphericalConfig,
    scale: float,
    seed: SeedLike = None,
) -> PerturbationBundle:
    rng = np.random.default_rng(seed)
    raw = PerturbationBundle(rng.standard_normal(config.points.shape))
    return raw.tangent_to(config).scaled_to(scale)


def rotation_bundle(
    config: SphericalConfig,
    scale: float,
    seed: SeedLike = None,
) -> PerturbationBundle:
    """h_i = W x_i for a random skew-symmetric W."""
    rng = np.random.default_rng(seed)
    generator = rng.standard_normal((config.dim, config.dim))
    skew = generator - generator.T
    return PerturbationBundle(config.points @ skew.T).scaled_to(scale)


def _unequal_edges(config: SphericalConfig) -> tuple[int, int, int]:
    inner = gram(config)
    size = config.size
    for first in range(size):
        for second in range(first + 1, size):
            if inner[first, second] < -1.0 + EDGE_TOL:
                continue
            for witness in range(size):
                if witness in (first, second):
                    continue
                if abs(inner[first, witness] - inner[second, witness]) > EDGE_TOL:
                    return first, second, witness
    raise NotApplicableError("every pair sees all other points at equal inner products")


def _symmetric_pair_sum(base: FloatArray, shift: FloatArray) -> float:
    # sum_{i<j} (base_i.shift_j + base_j.shift_i)^2
    products = base @ shift.T
    symmetric = products + products.T
    upper = np.triu_indices(base.shape[0], k=1)
    return float(np.sum(symmetric[upper] ** 2))


def _norm_sq(vector: FloatArray) -> float:
    return float(vector @ vector)


def _check_shape(config: SphericalConfig, bundle: PerturbationBundle) -> None:
    if bundle.h.shape != config.points.shape:
        raise InvalidArgumentError(
            f"bundle shape {bundle.h.shape} does not match configuration {config.points.shape}"
        )
