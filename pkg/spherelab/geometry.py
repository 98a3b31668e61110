"""Point configurations on the unit sphere and the families built from them.

A configuration is an ordered set of N unit vectors in R^d. Every other
module consumes `SphericalConfig`; this module constructs the named families
(regular and orthogonal simplexes, pyramids, cross polytopes, the square
pyramid height family) and converts between Cartesian points and the
gauge-fixed spherical chart on five points of S^2.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.spatial.distance import pdist

from spherelab.errors import GaugeSingularError, InvalidArgumentError

FloatArray = NDArray[np.float64]

UNIT_NORM_TOL = 1e-12
DISTINCT_TOL = 1e-9
SPAN_RANK_TOL = 1e-8
TWO_PI = 2.0 * math.pi

CHART_ANGLE_NAMES = ("theta2", "phi3", "theta3", "phi4", "theta4", "phi5", "theta5")


@dataclass(frozen=True, eq=False)
class SphericalConfig:
    """N unit vectors in R^dim, frozen after validation."""

    dim: int
    points: FloatArray
    label: str | None = None
    allow_coincident: bool = field(default=False, repr=False)

    def __post_init__(self) -> None:
        points = np.array(self.points, dtype=np.float64)
        if points.ndim != 2:
            raise InvalidArgumentError(f"points must be a 2-d array, got shape {points.shape}")
        size, width = points.shape
        if self.dim < 1 or width != self.dim:
            raise InvalidArgumentError(f"points have {width} columns but dim={self.dim}")
        if size < 2:
            raise InvalidArgumentError(f"a configuration needs at least 2 points, got {size}")
        if not np.all(np.isfinite(points)):
            raise InvalidArgumentError("points contain non-finite coordinates")

        norms = np.linalg.norm(points, axis=1)
        off_sphere = np.flatnonzero(np.abs(norms - 1.0) > UNIT_NORM_TOL)
        if off_sphere.size:
            index = int(off_sphere[0])
            raise InvalidArgumentError(f"point {index} has norm {norms[index]!r}, expected 1")

        if not self.allow_coincident:
            closest = float(pdist(points).min())
            if closest <= DISTINCT_TOL:
                raise InvalidArgumentError(
                    f"points are not pairwise distinct (min distance {closest:.3e})"
                )

        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    def __len__(self) -> int:
        return self.size

    def with_label(self, label: str) -> "SphericalConfig":
        return SphericalConfig(self.dim, self.points, label, self.allow_coincident)

    def moved(self, points: FloatArray, label: str | None = None) -> "SphericalConfig":
        """Return a configuration of the same dimension with new points."""
        return SphericalConfig(self.dim, points, label if label is not None else self.label)


@dataclass(frozen=True)
class PartitionType:
    """Block sizes of a stationary structure.

    A block n >= 2 is a regular simplex spanning n-1 dimensions; a block of
    1 is an apex, equidistant to every point below it, which adds one
    dimension through the lift.
    """

    blocks: tuple[int, ...]

    def __post_init__(self) -> None:
        blocks = tuple(int(block) for block in self.blocks)
        if not blocks:
            raise InvalidArgumentError("a partition needs at least one block")
        if any(block < 1 for block in blocks):
            raise InvalidArgumentError(f"partition blocks must be positive, got {list(blocks)}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def parse(cls, text: str) -> "PartitionType":
        """Parse "3,2" or "[1, 2, 2]" into a partition."""
        cleaned = text.strip().strip("[]()")
        try:
            blocks = tuple(int(part) for part in cleaned.split(",") if part.strip())
        except ValueError as exc:
            raise InvalidArgumentError(f"cannot parse partition {text!r}") from exc
        return cls(blocks)

    @property
    def size(self) -> int:
        return sum(self.blocks)

    @property
    def dim(self) -> int:
        return sum(block - 1 if block >= 2 else 1 for block in self.blocks)

    @property
    def apex_count(self) -> int:
        return sum(1 for block in self.blocks if block == 1)

    @property
    def has_apex(self) -> bool:
        return self.apex_count > 0

    @property
    def base_blocks(self) -> tuple[int, ...]:
        return tuple(block for block in self.blocks if block >= 2)

    def canonical(self) -> "PartitionType":
        """Apexes first, then simplex blocks in decreasing size."""
        return PartitionType((1,) * self.apex_count + tuple(sorted(self.base_blocks, reverse=True)))

    def __str__(self) -> str:
        return "[" + ",".join(str(block) for block in self.blocks) + "]"


@dataclass(frozen=True, eq=False)
class Conf35Coords:
    """Gauge-fixed chart of five points on S^2.

    Angles are (theta2, phi3, theta3, phi4, theta4, phi5, theta5) with
    x = (sin t cos p, sin t sin p, cos t) and phi1 = theta1 = phi2 = 0.
    """

    values: FloatArray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if values.shape != (7,):
            raise InvalidArgumentError(f"chart coordinates need 7 angles, got {values.size}")
        polar = values[[0, 2, 4, 6]]
        azimuth = values[[1, 3, 5]]
        if np.any(polar < -UNIT_NORM_TOL) or np.any(polar > math.pi + UNIT_NORM_TOL):
            raise InvalidArgumentError(f"polar angles must lie in [0, pi], got {polar.tolist()}")
        if np.any(azimuth < 0.0) or np.any(azimuth >= TWO_PI):
            raise InvalidArgumentError(f"azimuths must lie in [0, 2pi), got {azimuth.tolist()}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def polar_angles(self) -> FloatArray:
        """Polar angles of points 1..5 (theta1 = 0)."""
        return np.concatenate([[0.0], self.values[[0, 2, 4, 6]]])

    @property
    def azimuths(self) -> FloatArray:
        """Azimuths of points 1..5 (phi1 = phi2 = 0)."""
        return np.concatenate([[0.0, 0.0], self.values[[1, 3, 5]]])

    def as_dict(self) -> dict[str, float]:
        return dict(zip(CHART_ANGLE_NAMES, (float(value) for value in self.values)))


def normalize_rows(points: FloatArray) -> FloatArray:
    """Scale every row to unit length."""
    points = np.asarray(points, dtype=np.float64)
    return points / np.linalg.norm(points, axis=1, keepdims=True)


def regular_simplex(m: int) -> SphericalConfig:
    """The m vertices of a regular simplex, in R^(m-1)."""
    if m < 2:
        raise InvalidArgumentError(f"a regular simplex needs m >= 2, got {m}")
    return SphericalConfig(m - 1, _simplex_coordinates(m), label=f"regular_simplex({m})")


def orthogonal_simplexes(partition: PartitionType, dim: int | None = None) -> SphericalConfig:
    """Regular simplexes in mutually orthogonal coordinate blocks.

    Coordinates are assigned block by block from the left and points are
    ordered the same way, so block i occupies a contiguous index range.
    """
    if partition.has_apex:
        raise InvalidArgumentError(
            f"partition {partition} has apex blocks; use pyramid_config instead"
        )
    _check_dim(partition, dim)

    points = np.zeros((partition.size, partition.dim))
    row = 0
    column = 0
    for block in partition.blocks:
        points[row : row + block, column : column + block - 1] = _simplex_coordinates(block)
        row += block
        column += block - 1
    return SphericalConfig(partition.dim, points, label=f"orthogonal_simplexes{partition}")


def pyramid_config(partition: PartitionType, dim: int | None = None) -> SphericalConfig:
    """Apexes stacked over an orthogonal-simplex base.

    Each apex sits at the north pole of its level; the points below it are
    lifted to height -1/(count below) so the apex is equidistant to all of
    them. Points are ordered outermost apex first.
    """
    if not partition.has_apex:
        return orthogonal_simplexes(partition, dim)

    apexes = partition.apex_count
    if any(block != 1 for block in partition.blocks[:apexes]):
        raise InvalidArgumentError(f"apex blocks must precede simplex blocks in {partition}")
    if not partition.base_blocks:
        raise InvalidArgumentError(f"partition {partition} has no simplex base")
    _check_dim(partition, dim)

    points = orthogonal_simplexes(PartitionType(partition.base_blocks)).points
    for _ in range(apexes):
        points = lift_with_apex(points)
    return SphericalConfig(partition.dim, points, label=f"pyramid_config{partition}")


def lift_with_apex(points: FloatArray) -> FloatArray:
    """Lift points on S^(d-1) into S^d below a new apex at the north pole."""
    points = np.asarray(points, dtype=np.float64)
    count, width = points.shape
    height = -1.0 / count
    scale = math.sqrt(1.0 - height**2)
    lifted = np.hstack([scale * points, np.full((count, 1), height)])
    apex = np.zeros((1, width + 1))
    apex[0, -1] = 1.0
    return np.vstack([apex, lifted])


def cross_polytope(dim: int) -> SphericalConfig:
    """The 2*dim points +e_1..+e_d followed by -e_1..-e_d."""
    if dim < 1:
        raise InvalidArgumentError(f"cross polytope needs dim >= 1, got {dim}")
    identity = np.eye(dim)
    return SphericalConfig(dim, np.vstack([identity, -identity]), label=f"cross_polytope({dim})")


def square_pyramid_fp(t: float) -> SphericalConfig:
    """Apex at the north pole over a square base in the plane z = t."""
    if not -1.0 < t < 1.0:
        raise InvalidArgumentError(f"base height must lie in (-1, 1), got {t}")
    radius = math.sqrt(1.0 - t * t)
    points = np.array(
        [
            [0.0, 0.0, 1.0],
            [radius, 0.0, t],
            [0.0, radius, t],
            [-radius, 0.0, t],
            [0.0, -radius, t],
        ]
    )
    return SphericalConfig(3, points, label=f"square_pyramid_fp({t:g})")


def regular_polygon(n: int, dim: int = 2) -> SphericalConfig:
    """Regular n-gon in the first two coordinates of R^dim."""
    if n < 2:
        raise InvalidArgumentError(f"a polygon needs n >= 2, got {n}")
    if dim < 2:
        raise InvalidArgumentError(f"a polygon needs dim >= 2, got {dim}")
    angles = TWO_PI * np.arange(n) / n
    points = np.zeros((n, dim))
    points[:, 0] = np.cos(angles)
    points[:, 1] = np.sin(angles)
    return SphericalConfig(dim, points, label=f"regular_polygon({n}, dim={dim})")


def random_config(
    dim: int,
    size: int,
    seed: int | np.random.SeedSequence | None = None,
) -> SphericalConfig:
    """I.i.d. uniform points on S^(dim-1), deterministic per seed."""
    if dim < 2 or size < 2:
        raise InvalidArgumentError(f"random_config needs dim >= 2 and size >= 2, got ({dim}, {size})")
    rng = np.random.default_rng(seed)
    points = normalize_rows(rng.standard_normal((size, dim)))
    return SphericalConfig(dim, points, label=f"random_config({dim}, {size})")


def from_spherical(coords: Conf35Coords) -> SphericalConfig:
    """Five points of S^2 from their gauge-fixed chart coordinates."""
    theta = coords.polar_angles
    phi = coords.azimuths
    points = np.column_stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
    )
    return SphericalConfig(3, points, label="chart")


def to_spherical(config: SphericalConfig) -> Conf35Coords:
    """Chart coordinates of five points on S^2 after fixing the gauge.

    x1 is rotated to the north pole and x2 into the phi = 0 half-plane.
    """
    if config.dim != 3 or config.size != 5:
        raise InvalidArgumentError(
            f"the chart needs 5 points in R^3, got {config.size} in R^{config.dim}"
        )
    rotated = config.points @ gauge_rotation(config.points).T
    theta = np.arccos(np.clip(rotated[:, 2], -1.0, 1.0))
    phi = np.mod(np.arctan2(rotated[:, 1], rotated[:, 0]), TWO_PI)
    phi = np.where(phi >= TWO_PI, phi - TWO_PI, phi)
    return Conf35Coords(
        np.array([theta[1], phi[2], theta[2], phi[3], theta[3], phi[4], theta[4]])
    )


def gauge_rotation(points: FloatArray) -> FloatArray:
    """Proper rotation taking x1 to the north pole and x2 to azimuth 0."""
    first, second = points[0], points[1]
    pole = np.array([0.0, 0.0, 1.0])

    offset = first - pole
    offset_norm2 = float(offset @ offset)
    if offset_norm2 < 1e-30:
        to_pole = np.eye(3)
    else:
        householder = np.eye(3) - 2.0 * np.outer(offset, offset) / offset_norm2
        # The reflection fixes the pole and restores det = +1.
        to_pole = np.diag([-1.0, 1.0, 1.0]) @ householder

    moved = to_pole @ second
    transverse = math.hypot(moved[0], moved[1])
    if transverse < DISTINCT_TOL:
        raise GaugeSingularError("x2 lies on the polar axis after the gauge rotation")
    cos_phi, sin_phi = moved[0] / transverse, moved[1] / transverse
    about_pole = np.array(
        [
            [cos_phi, sin_phi, 0.0],
            [-sin_phi, cos_phi, 0.0],
            [0.0, 0.0, 1.0],
        ]
    )
    return about_pole @ to_pole


def gram(config: SphericalConfig) -> FloatArray:
    """Symmetric matrix of inner products with an exact unit diagonal."""
    points = config.points
    inner = points @ points.T
    inner = 0.5 * (inner + inner.T)
    np.fill_diagonal(inner, 1.0)
    return inner


def centroid(config: SphericalConfig) -> FloatArray:
    return config.points.mean(axis=0)


def min_distance(config: SphericalConfig) -> float:
    return float(pdist(config.points).min())


def span_rank(config: SphericalConfig, rel_tol: float = SPAN_RANK_TOL) -> int:
    """Numerical rank of the point matrix."""
    singular = np.linalg.svd(config.points, compute_uv=False)
    threshold = rel_tol * max(float(singular[0]), 1.0)
    return int(np.count_nonzero(singular > threshold))


def _simplex_coordinates(m: int) -> FloatArray:
    # Standard-basis embedding e_i - (1/m, ..., 1/m), scaled to the sphere and
    # written in an orthonormal basis of the hyperplane orthogonal to (1, ..., 1).
    embedded = math.sqrt(m / (m - 1)) * (np.eye(m) - 1.0 / m)
    return normalize_rows(embedded @ _helmert_basis(m).T)


def _helmert_basis(m: int) -> FloatArray:
    basis = np.zeros((m - 1, m))
    for k in range(1, m):
        basis[k - 1, :k] = 1.0
        basis[k - 1, k] = -float(k)
        basis[k - 1] /= math.sqrt(k * (k + 1))
    return basis


def _check_dim(partition: PartitionType, dim: int | None) -> None:
    if dim is not None and dim != partition.dim:
        raise InvalidArgumentError(
            f"partition {partition} spans dimension {partition.dim}, not {dim}"
        )
