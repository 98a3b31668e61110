"""Tests for pair potentials, energies and force residuals."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from spherelab.errors import InvalidArgumentError, SingularPairError
from spherelab.geometry import (
    PartitionType,
    SphericalConfig,
    orthogonal_simplexes,
    pyramid_config,
    random_config,
    regular_polygon,
    regular_simplex,
    square_pyramid_fp,
)
from spherelab.potentials import (
    BiQuadraticPotential,
    GaussPotential,
    LogPotential,
    PotentialKind,
    RieszPotential,
    centroid_norm,
    energy,
    euclidean_gradient,
    log_energy_difference,
    log_force_report,
    pair_potential,
    parse_potential,
    riemannian_grad_norm,
    tangent_gradient,
)

E_TBP = -3.0 * math.log(3.0) - 8.0 * math.log(2.0)

KINDS: list[PotentialKind] = [
    LogPotential(),
    RieszPotential(1.0),
    RieszPotential(-1.0),
    GaussPotential(2.0),
    BiQuadraticPotential(1.0, 3.0, 0.5),
]

ALL_SPLITS = [(d + 2 - m, m) for d in range(2, 31) for m in range(2, (d + 2) // 2 + 1)]


class TestParsePotential:
    @pytest.mark.parametrize("text,expected", [
        ("log", LogPotential()),
        ("riesz:2", RieszPotential(2.0)),
        ("riesz:-1", RieszPotential(-1.0)),
        ("gauss:1.5", GaussPotential(1.5)),
        ("biquad:1,3", BiQuadraticPotential(1.0, 3.0, 0.0)),
        ("BIQUAD:1,3,2", BiQuadraticPotential(1.0, 3.0, 2.0)),
    ])
    def test_accepted_spellings(self, text: str, expected: PotentialKind) -> None:
        assert parse_potential(text) == expected

    @pytest.mark.parametrize("text", ["", "coulomb", "riesz", "riesz:0", "gauss:-1", "biquad:1,1", "log:2", "riesz:x"])
    def test_rejected_spellings(self, text: str) -> None:
        with pytest.raises(InvalidArgumentError):
            parse_potential(text)

    @pytest.mark.parametrize("kind", KINDS)
    def test_name_round_trips(self, kind: PotentialKind) -> None:
        assert parse_potential(kind.name) == kind


class TestPairPotential:
    def test_log_matches_distance_form(self) -> None:
        t = 0.3
        assert pair_potential(LogPotential(), t) == pytest.approx(-math.log(math.sqrt(2 - 2 * t)))

    def test_negative_riesz_rewards_distance(self) -> None:
        kind = RieszPotential(-1.0)
        assert pair_potential(kind, -1.0) == pytest.approx(-2.0)
        assert pair_potential(kind, 0.5) > pair_potential(kind, -0.5)

    @pytest.mark.parametrize("kind", KINDS)
    def test_derivatives_match_finite_differences(self, kind: PotentialKind) -> None:
        t, step = 0.2, 1e-6
        first = (pair_potential(kind, t + step) - pair_potential(kind, t - step)) / (2 * step)
        second = (pair_potential(kind, t + step, 1) - pair_potential(kind, t - step, 1)) / (2 * step)
        assert pair_potential(kind, t, 1) == pytest.approx(first, rel=1e-6)
        assert pair_potential(kind, t, 2) == pytest.approx(second, rel=1e-6)

    def test_log_is_singular_at_one(self) -> None:
        with pytest.raises(SingularPairError):
            pair_potential(LogPotential(), 1.0)

    def test_smooth_kinds_evaluate_at_one(self) -> None:
        assert pair_potential(GaussPotential(1.0), 1.0) == pytest.approx(math.e)

    def test_rejects_bad_order(self) -> None:
        with pytest.raises(InvalidArgumentError, match="order"):
            pair_potential(LogPotential(), 0.0, order=3)


class TestEnergy:
    def test_square_log_energy(self) -> None:
        assert energy(regular_polygon(4), LogPotential()) == pytest.approx(-8.0 * math.log(2.0), abs=1e-12)

    def test_triangular_bipyramid_log_energy(self) -> None:
        tbp = orthogonal_simplexes(PartitionType((3, 2)))
        assert energy(tbp, LogPotential()) == pytest.approx(E_TBP, abs=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 5, 9])
    def test_regular_simplex_closed_form(self, d: int) -> None:
        expected = -d * (d + 1) / 2 * math.log(2 * (d + 1) / d)
        assert energy(regular_simplex(d + 1), LogPotential()) == pytest.approx(expected, abs=1e-11)

    def test_coincident_pair_is_singular(self) -> None:
        config = SphericalConfig(2, np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), allow_coincident=True)
        with pytest.raises(SingularPairError) as info:
            energy(config, LogPotential())
        assert info.value.pair == (0, 1)

    def test_riesz_small_s_approaches_log_difference(self) -> None:
        tbp = orthogonal_simplexes(PartitionType((3, 2)))
        fp = square_pyramid_fp(-0.25)
        s = 1e-4
        riesz = (energy(tbp, RieszPotential(s)) - energy(fp, RieszPotential(s))) / s
        log = energy(tbp, LogPotential()) - energy(fp, LogPotential())
        assert abs(riesz - log) / abs(log) < 1e-2

    @pytest.mark.parametrize("d", range(2, 13))
    def test_balanced_split_has_lowest_energy(self, d: int) -> None:
        energies = {
            (m, d + 2 - m): energy(orthogonal_simplexes(PartitionType((m, d + 2 - m))), LogPotential())
            for m in range((d + 3) // 2, d + 1)
        }
        best = min(energies, key=energies.__getitem__)
        assert best[0] - best[1] == d % 2
        others = [value for key, value in energies.items() if key != best]
        if others:
            assert min(others) - energies[best] > 1e-9


class TestGradients:
    @pytest.mark.parametrize("kind", KINDS)
    @pytest.mark.parametrize("d,seed", [(d, seed) for d in (2, 3, 4, 6) for seed in range(5)])
    def test_euclidean_gradient_matches_finite_differences(self, kind: PotentialKind, d: int, seed: int) -> None:
        config = random_config(d, d + 2, seed=seed)
        gradient = euclidean_gradient(config, kind)
        step = 1e-6
        numeric = np.zeros_like(gradient)
        for i in range(config.size):
            for k in range(config.dim):
                shifted = []
                for sign in (1.0, -1.0):
                    points = np.array(config.points)
                    points[i, k] += sign * step
                    # Off-sphere evaluation: the energy is a function of the Gram entries only.
                    shifted.append(_energy_of_points(points, kind))
                numeric[i, k] = (shifted[0] - shifted[1]) / (2 * step)
        scale = max(1.0, float(np.abs(gradient).max()))
        assert_allclose(gradient, numeric, rtol=1e-5, atol=1e-6 * scale)

    def test_tangent_gradient_is_tangent(self) -> None:
        config = random_config(4, 6, seed=5)
        gradient = tangent_gradient(config, LogPotential())
        assert_allclose(np.sum(gradient * config.points, axis=1), 0.0, atol=1e-12)
        assert riemannian_grad_norm(config, LogPotential()) > 1e-3

    @pytest.mark.parametrize("config", [
        orthogonal_simplexes(PartitionType((3, 2))),
        pyramid_config(PartitionType((1, 2, 2))),
        regular_polygon(5, dim=3),
    ], ids=["tbp", "fp", "pentagon"])
    def test_stationary_configs_have_radial_gradient(self, config: SphericalConfig) -> None:
        assert riemannian_grad_norm(config, LogPotential()) < 1e-12


class TestLogForceReport:
    def test_two_simplex_split_is_stationary(self) -> None:
        config = orthogonal_simplexes(PartitionType((4, 3)))
        report = log_force_report(config)
        assert report.max_residual < 1e-10
        assert_allclose(report.lambda_estimates, config.size - 1, atol=1e-10)
        assert_allclose(report.distance_sum_defect, 0.0, atol=1e-10)
        assert report.max_residual == pytest.approx(float(report.per_point_residual.max()))

    @pytest.mark.parametrize("blocks", ALL_SPLITS)
    def test_every_split_balances_its_forces(self, blocks: tuple[int, int]) -> None:
        config = orthogonal_simplexes(PartitionType(blocks))
        report = log_force_report(config)
        assert report.max_residual < 1e-9
        assert_allclose(report.lambda_estimates, config.size - 1, atol=1e-9)

    def test_random_config_is_not_stationary(self) -> None:
        report = log_force_report(random_config(3, 5, seed=1))
        assert report.max_residual > 1e-3

    @pytest.mark.parametrize("seed", range(5))
    def test_residual_agrees_with_gradient_and_centroid(self, seed: int) -> None:
        config = random_config(3, 5, seed=seed)
        stationary = log_force_report(config).max_residual < 1e-10
        assert stationary == (
            riemannian_grad_norm(config, LogPotential()) < 1e-9 and centroid_norm(config) < 1e-10
        )


class TestLogEnergyDifference:
    def test_matches_direct_difference(self) -> None:
        before = random_config(3, 5, seed=8)
        after = random_config(3, 5, seed=9)
        direct = energy(after, LogPotential()) - energy(before, LogPotential())
        assert log_energy_difference(before, after) == pytest.approx(direct, rel=1e-12)

    def test_rejects_shape_mismatch(self) -> None:
        with pytest.raises(InvalidArgumentError):
            log_energy_difference(random_config(3, 5, seed=0), random_config(3, 6, seed=0))


def _energy_of_points(points: np.ndarray, kind: PotentialKind) -> float:
    inner = points @ points.T
    upper = np.triu_indices(points.shape[0], k=1)
    return 2.0 * float(np.sum(kind.evaluate(inner[upper])))
