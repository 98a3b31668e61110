"""Tests for the escape rotation, the pyramid path and the second-order form."""

import math

import numpy as np
import pytest

from spherelab.errors import InvalidArgumentError, NotApplicableError, NotDegenerateError
from spherelab.geometry import (
    PartitionType,
    orthogonal_simplexes,
    pyramid_config,
    regular_polygon,
)
from spherelab.potentials import (
    BiQuadraticPotential,
    GaussPotential,
    LogPotential,
    PotentialKind,
    RieszPotential,
    energy,
)
from spherelab.perturbation import (
    PerturbationBundle,
    degenerate_escape,
    centered_matrix_gap,
    transpose_pair_gap,
    path_bracket,
    pyramid_energy,
    pyramid_path,
    quadratic_form_D,
    quartic_term,
    random_centered_matrix,
    random_transpose_pair,
    random_tangent_bundle,
    rotation_bundle,
    second_order_check,
)
from spherelab.stationarity import Pyramid, TwoSimplex, classify


@pytest.fixture
def pentagon():
    return regular_polygon(5, dim=3)


@pytest.fixture
def tbp():
    return orthogonal_simplexes(PartitionType((3, 2)))


class TestDegenerateEscape:
    @pytest.mark.parametrize("theta", [0.1, 1.0, 2.0, 3.0])
    @pytest.mark.parametrize("kind", [
        LogPotential(),
        RieszPotential(1.0),
        RieszPotential(-1.0),
        GaussPotential(1.0),
        BiQuadraticPotential(1.0, 3.0),
    ], ids=str)
    def test_energy_strictly_decreases(self, pentagon, kind: PotentialKind, theta: float) -> None:
        result = degenerate_escape(pentagon, kind, theta)
        assert result.energy_delta < 0.0
        assert result.energy_delta == pytest.approx(
            energy(result.config, kind) - energy(pentagon, kind), abs=1e-12
        )

    def test_rotated_pair_keeps_its_inner_product(self, pentagon) -> None:
        result = degenerate_escape(pentagon, LogPotential(), 1.0)
        first, second = result.pair
        before = pentagon.points[first] @ pentagon.points[second]
        after = result.config.points[first] @ result.config.points[second]
        assert after == pytest.approx(before, abs=1e-12)
        assert result.witness not in result.pair

    def test_escaped_config_leaves_the_plane(self, pentagon) -> None:
        result = degenerate_escape(pentagon, LogPotential(), 0.5)
        assert np.max(np.abs(result.config.points[:, 2])) > 0.1

    def test_rejects_spanning_config(self, tbp) -> None:
        with pytest.raises(NotDegenerateError):
            degenerate_escape(tbp, LogPotential(), 1.0)

    def test_rejects_too_few_points(self) -> None:
        with pytest.raises(NotApplicableError, match="N >= d\\+2"):
            degenerate_escape(regular_polygon(3, dim=3), LogPotential(), 1.0)

    def test_rejects_non_convex_potential(self, pentagon) -> None:
        with pytest.raises(NotApplicableError, match="convex"):
            degenerate_escape(pentagon, RieszPotential(-3.0), 1.0)

    @pytest.mark.parametrize("theta", [0.0, math.pi, -0.5])
    def test_rejects_angle_outside_open_interval(self, pentagon, theta: float) -> None:
        with pytest.raises(InvalidArgumentError):
            degenerate_escape(pentagon, LogPotential(), theta)


class TestPyramidPath:
    def test_bracket(self) -> None:
        assert path_bracket(2, 2) == pytest.approx((-1 / 8, 1 / 8))
        assert path_bracket(3, 2) == pytest.approx((-1 / 10, 1 / 15))

    def test_midpoint_is_the_pyramid(self) -> None:
        assert classify(pyramid_path(2, 3, 0.0)) == Pyramid(PartitionType((1, 3, 2)))

    @pytest.mark.parametrize("k", range(2, 6))
    @pytest.mark.parametrize("m", range(2, 6))
    def test_endpoints_are_two_simplex_splits(self, k: int, m: int) -> None:
        low, high = path_bracket(k, m)
        at_high = classify(pyramid_path(k, m, high))
        at_low = classify(pyramid_path(k, m, low))
        assert at_high == TwoSimplex(max(k + 1, m), min(k + 1, m))
        assert at_low == TwoSimplex(max(k, m + 1), min(k, m + 1))

    def test_rejects_t_outside_bracket(self) -> None:
        with pytest.raises(InvalidArgumentError, match="bracket"):
            pyramid_path(2, 2, 0.2)

    @pytest.mark.parametrize("k", range(2, 7))
    @pytest.mark.parametrize("m", range(2, 7))
    def test_closed_form_matches_direct_energy(self, k: int, m: int) -> None:
        low, high = path_bracket(k, m)
        for t in np.linspace(low, high, 101):
            sample = pyramid_energy(k, m, float(t))
            assert abs(sample.energy - sample.energy_direct) < 1e-10

    @pytest.mark.parametrize("k,m,t", [(2, 2, 0.05), (3, 2, -0.04), (4, 3, 0.02)])
    def test_derivative_matches_finite_difference(self, k: int, m: int, t: float) -> None:
        step = 1e-6
        numeric = (
            pyramid_energy(k, m, t + step).energy - pyramid_energy(k, m, t - step).energy
        ) / (2 * step)
        assert pyramid_energy(k, m, t).derivative == pytest.approx(numeric, abs=1e-7)

    @pytest.mark.parametrize("t,sign", [(0.0, 0), (1e-3, -1), (-1e-3, 1)])
    def test_derivative_sign(self, t: float, sign: int) -> None:
        assert pyramid_energy(2, 2, t).derivative_sign == sign

    def test_pyramid_is_an_energy_maximum_along_the_path(self) -> None:
        low, high = path_bracket(3, 3)
        center = pyramid_energy(3, 3, 0.0).energy
        assert pyramid_energy(3, 3, high).energy < center
        assert pyramid_energy(3, 3, low).energy < center


class TestQuadraticForm:
    def test_zero_bundle(self, tbp) -> None:
        form = quadratic_form_D(tbp, PerturbationBundle(np.zeros((5, 3))))
        assert (form.total, form.d1, form.d2, form.d3, form.centroid_term) == (0.0, 0.0, 0.0, 0.0, 0.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_rotation_is_energy_neutral(self, tbp, seed: int) -> None:
        form = quadratic_form_D(tbp, rotation_bundle(tbp, 1e-4, seed))
        assert abs(form.total) < 1e-10

    @pytest.mark.parametrize("blocks", [(3, 2), (3, 3), (4, 2)])
    def test_nonnegative_on_tangent_bundles(self, blocks: tuple[int, int]) -> None:
        config = orthogonal_simplexes(PartitionType(blocks))
        for seed in range(200):
            form = quadratic_form_D(config, random_tangent_bundle(config, 1e-3, seed))
            assert form.total >= -1e-12
            assert form.total == pytest.approx(form.centroid_term + form.d1 + form.d2 + form.d3, abs=1e-15)

    def test_requires_two_simplex_split(self) -> None:
        config = pyramid_config(PartitionType((1, 2, 2)))
        with pytest.raises(NotApplicableError):
            quadratic_form_D(config, PerturbationBundle(np.zeros((5, 3))))

    def test_rejects_bundle_shape_mismatch(self, tbp) -> None:
        with pytest.raises(InvalidArgumentError, match="shape"):
            quadratic_form_D(tbp, PerturbationBundle(np.zeros((4, 3))))

    @pytest.mark.parametrize("blocks", [(3, 2), (4, 2), (3, 3)])
    def test_quartic_term_is_positive(self, blocks: tuple[int, ...]) -> None:
        config = orthogonal_simplexes(PartitionType(blocks))
        bundle = random_tangent_bundle(config, 1e-2, seed=3)
        assert quartic_term(config, bundle) > 0.0

    @pytest.mark.parametrize("blocks", [(3, 2), (4, 2), (3, 3)])
    def test_quartic_term_scales_with_fourth_power(self, blocks: tuple[int, ...]) -> None:
        config = orthogonal_simplexes(PartitionType(blocks))
        bundle = random_tangent_bundle(config, 1.0, seed=5)
        doubled = PerturbationBundle(2.0 * bundle.h)
        assert quartic_term(config, doubled) == pytest.approx(16.0 * quartic_term(config, bundle), rel=1e-12)

    @pytest.mark.parametrize("blocks", [(3, 2), (4, 2), (3, 3)])
    def test_quartic_cross_pair_uses_full_inner_product(self, blocks: tuple[int, ...]) -> None:
        config = orthogonal_simplexes(PartitionType(blocks))
        first = config.points[0]
        # Tangent at the first point and orthogonal to the whole second block.
        shared = config.points[1] - (config.points[1] @ first) * first
        # One moving point per block leaves only the cross pair.
        raw = np.zeros(config.points.shape)
        raw[0] = shared
        raw[-1] = shared
        bundle = PerturbationBundle(raw)
        members = tuple(range(blocks[0])), tuple(range(blocks[0], config.size))
        expected = float(bundle.h[0] @ bundle.h[-1]) ** 2
        assert quartic_term(config, bundle, members) == pytest.approx(expected, rel=1e-12)
        assert expected > 0.0


class TestSecondOrderCheck:
    @pytest.mark.parametrize("seed", range(3))
    def test_remainder_is_cubic(self, tbp, seed: int) -> None:
        bundle = random_tangent_bundle(tbp, 1.0, seed)
        coarse, fine = second_order_check(tbp, bundle, [1e-2, 1e-3])
        assert fine.ratio <= 10.0 * coarse.ratio + 1e-6

    def test_rotation_leaves_energy_unchanged(self, tbp) -> None:
        (sample,) = second_order_check(tbp, rotation_bundle(tbp, 1.0, seed=1), [1e-4])
        assert abs(sample.energy_delta) < 1e-14

    def test_non_tangent_bundle_is_projected(self, tbp) -> None:
        rng = np.random.default_rng(9)
        bundle = PerturbationBundle(rng.standard_normal((5, 3)))
        coarse, fine = second_order_check(tbp, bundle, [1e-2, 1e-3])
        assert fine.ratio <= 10.0 * coarse.ratio + 1e-6


class TestMatrixInequalities:
    def test_zero_matrix(self) -> None:
        assert centered_matrix_gap(np.zeros((4, 4))) == 0.0
        assert transpose_pair_gap(np.zeros((3, 2)), np.zeros((2, 3))) == 0.0

    def test_antisymmetric_matrix_has_zero_gap(self) -> None:
        rng = np.random.default_rng(0)
        size = 5
        raw = rng.standard_normal((size, size))
        centering = np.eye(size) - np.ones((size, size)) / size
        matrix = centering @ (raw - raw.T) @ centering
        assert centered_matrix_gap(matrix) == pytest.approx(0.0, abs=1e-12)

    def test_negated_transpose_pair_has_zero_gap(self) -> None:
        rng = np.random.default_rng(1)
        f_matrix = rng.standard_normal((4, 3))
        f_matrix -= f_matrix.mean(axis=1, keepdims=True)
        f_matrix -= f_matrix.mean(axis=0, keepdims=True)
        assert transpose_pair_gap(f_matrix, -f_matrix.T) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("size", range(3, 9))
    def test_random_feasible_matrices(self, size: int) -> None:
        for seed in range(1000):
            assert centered_matrix_gap(random_centered_matrix(size, seed)) >= -1e-12

    @pytest.mark.parametrize("m,n", [(2, 2), (3, 2), (4, 3), (5, 5)])
    def test_random_feasible_pairs(self, m: int, n: int) -> None:
        for seed in range(1000):
            assert transpose_pair_gap(*random_transpose_pair(m, n, seed)) >= -1e-12

    def test_centered_gap_rejects_small_or_infeasible_matrices(self) -> None:
        with pytest.raises(InvalidArgumentError, match="m >= 3"):
            centered_matrix_gap(np.zeros((2, 2)))
        with pytest.raises(InvalidArgumentError, match="diagonal"):
            centered_matrix_gap(np.eye(3))
        with pytest.raises(InvalidArgumentError, match="row sums"):
            centered_matrix_gap(np.ones((3, 3)) - np.eye(3))

    def test_transpose_pair_gap_rejects_shape_mismatch(self) -> None:
        with pytest.raises(InvalidArgumentError, match="shape"):
            transpose_pair_gap(np.zeros((3, 2)), np.zeros((3, 2)))
