"""End-to-end tests for the spherelab commands."""

import json
import math
from pathlib import Path

import pytest
from click.testing import CliRunner

from spherelab.configs.lab import LabConfig
from spherelab.entrypoint import cli

E_TBP = -3.0 * math.log(3.0) - 8.0 * math.log(2.0)


@pytest.fixture
def runner(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> CliRunner:
    """Runner inside an empty project so the repository settings never leak in."""
    (tmp_path / "pyproject.toml").write_text("[project]\nname = 'scratch'\n")
    monkeypatch.chdir(tmp_path)
    for name in ("SPHERELAB_DIGITS", "SPHERELAB_TOL", "SPHERELAB_SEED", "SPHERELAB_JOBS", "SPHERELAB_UNIT_TOL"):
        monkeypatch.delenv(name, raising=False)
    LabConfig.set_runtime_custom_path(None)
    yield CliRunner()
    LabConfig.set_runtime_custom_path(None)


def _construct(runner: CliRunner, *args: str) -> None:
    result = runner.invoke(cli, ["construct", *args])
    assert result.exit_code == 0, result.output


class TestConstruct:
    def test_writes_bipyramid_and_verifies_it(self, runner: CliRunner) -> None:
        _construct(runner, "--partition", "3,2", "--out", "tbp.json")
        assert json.loads(Path("tbp.json").read_text())["dim"] == 3

        result = runner.invoke(cli, ["verify", "tbp.json"])
        assert result.exit_code == 0, result.output
        assert "class=TwoSimplex(3,2)" in result.stdout
        assert "max_identity_defect=" in result.stdout

    def test_prints_json_without_out(self, runner: CliRunner) -> None:
        result = runner.invoke(cli, ["construct", "--partition", "1,2,2"])
        assert result.exit_code == 0, result.output
        document = json.loads(result.stdout)
        assert len(document["points"]) == 5

    def test_csv_output(self, runner: CliRunner) -> None:
        result = runner.invoke(cli, ["construct", "--family", "polygon", "--size", "4", "--format", "csv"])
        assert result.exit_code == 0, result.output
        assert result.stdout.splitlines()[0] == "x1,x2"

    def test_requires_a_family(self, runner: CliRunner) -> None:
        result = runner.invoke(cli, ["construct"])
        assert result.exit_code == 2

    def test_rejects_malformed_partition(self, runner: CliRunner) -> None:
        result = runner.invoke(cli, ["construct", "--partition", "3,x"])
        assert result.exit_code == 2


class TestEnergyAndClassify:
    def test_energy_json(self, runner: CliRunner) -> None:
        _construct(runner, "--partition", "3,2", "--out", "tbp.json")
        result = runner.invoke(cli, ["energy", "tbp.json", "--format", "json"])
        assert result.exit_code == 0, result.output
        values = json.loads(result.stdout)
        assert values["potential"] == "log"
        assert values["energy"] == pytest.approx(E_TBP, abs=1e-12)
        assert values["grad_norm"] < 1e-12

    def test_unknown_potential_is_a_usage_error(self, runner: CliRunner) -> None:
        _construct(runner, "--partition", "3,2", "--out", "tbp.json")
        result = runner.invoke(cli, ["energy", "tbp.json", "--potential", "coulomb"])
        assert result.exit_code == 2

    def test_classify_pyramid(self, runner: CliRunner) -> None:
        _construct(runner, "--partition", "1,2,2", "--out", "fp.json")
        result = runner.invoke(cli, ["classify", "fp.json"])
        assert result.exit_code == 0, result.output
        assert result.stdout.strip() == "class=Pyramid([1,2,2])"

    def test_classify_random_start(self, runner: CliRunner) -> None:
        _construct(runner, "--family", "random", "--dim", "3", "--size", "5", "--out", "start.csv")
        result = runner.invoke(cli, ["classify", "start.csv", "--format", "json"])
        assert result.exit_code == 0, result.output
        assert json.loads(result.stdout)["key"] == "NonStationary"

    def test_missing_config_file(self, runner: CliRunner) -> None:
        _construct(runner, "--partition", "3,2", "--out", "tbp.json")
        result = runner.invoke(cli, ["--config", "absent.toml", "energy", "tbp.json"])
        assert result.exit_code == 2


def _square_with_drift(path: Path, drift: float) -> None:
    """Four points on the circle with the first row pushed off the sphere."""
    points = [[1.0 + drift, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]
    path.write_text(json.dumps({"dim": 2, "points": points}))


class TestUnitTolerance:
    @pytest.mark.parametrize("command", ["energy", "verify", "classify", "escape", "optimize", "morse"])
    def test_tight_tolerance_rejects_drifted_rows(self, runner: CliRunner, command: str) -> None:
        _square_with_drift(Path("square.json"), 1e-8)
        result = runner.invoke(cli, [command, "square.json", "--unit-tol", "1e-10"])
        assert result.exit_code == 2
        assert "1e-10" in result.output

    def test_default_accepts_what_the_tight_tolerance_rejects(self, runner: CliRunner) -> None:
        _square_with_drift(Path("square.json"), 5e-10)
        assert runner.invoke(cli, ["energy", "square.json"]).exit_code == 0
        assert runner.invoke(cli, ["energy", "square.json", "--unit-tol", "1e-10"]).exit_code == 2

    def test_loose_tolerance_accepts_larger_drift(self, runner: CliRunner) -> None:
        _square_with_drift(Path("square.json"), 1e-8)
        assert runner.invoke(cli, ["energy", "square.json"]).exit_code == 2
        result = runner.invoke(cli, ["energy", "square.json", "--unit-tol", "1e-6", "--format", "json"])
        assert result.exit_code == 0, result.output
        assert json.loads(result.stdout)["min_distance"] == pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_rejects_non_positive_tolerance(self, runner: CliRunner) -> None:
        _square_with_drift(Path("square.json"), 0.0)
        assert runner.invoke(cli, ["energy", "square.json", "--unit-tol", "0"]).exit_code == 2


class TestPerturbationCommands:
    def test_path_table(self, runner: CliRunner) -> None:
        result = runner.invoke(cli, ["path", "--k", "2", "--m", "2", "--points", "5"])
        assert result.exit_code == 0, result.output
        lines = result.stdout.splitlines()
        assert lines[0] == "t,f,f_direct,derivative,sign"
        assert len(lines) == 6
        assert lines[3].split(",")[0] == "0"

    def test_escape_lowers_pentagon_energy(self, runner: CliRunner) -> None:
        _construct(runner, "--family", "polygon", "--size", "5", "--dim", "3", "--out", "pentagon.json")
        result = runner.invoke(cli, ["escape", "pentagon.json", "--theta", "1.0", "--format", "json", "--out", "escaped.json"])
        assert result.exit_code == 0, result.output
        assert json.loads(result.stdout)["energy_delta"] < 0.0
        assert Path("escaped.json").exists()

    def test_escape_rejects_spanning_config(self, runner: CliRunner) -> None:
        _construct(runner, "--partition", "3,2", "--out", "tbp.json")
        result = runner.invoke(cli, ["escape", "tbp.json"])
        assert result.exit_code == 3


class TestOptimizeCommands:
    def test_random_start_converges(self, runner: CliRunner) -> None:
        result = runner.invoke(cli, ["optimize", "--random", "3", "--trace", "trace.csv", "--format", "json"])
        assert result.exit_code == 0, result.output
        values = json.loads(result.stdout)
        assert values["class"] == "TwoSimplex(3,2)"
        assert values["converged"] is True
        assert Path("trace.csv").read_text().startswith("iter,energy,grad_norm\n")

    def test_needs_exactly_one_start(self, runner: CliRunner) -> None:
        assert runner.invoke(cli, ["optimize"]).exit_code == 2

    def test_basin_histogram(self, runner: CliRunner) -> None:
        result = runner.invoke(cli, ["basin", "--dim", "3", "--trials", "2", "--format", "json"])
        assert result.exit_code == 0, result.output
        assert json.loads(result.stdout)["histogram"] == {"TwoSimplex(3,2)": 2}


class TestMorseAndSweep:
    def test_chart_critical_point(self, runner: CliRunner) -> None:
        result = runner.invoke(cli, ["morse", "--critical", "C1"])
        assert result.exit_code == 0, result.output
        assert result.stdout.strip() == "index=1 nullity=0 orbit_dim=0"

    def test_general_method_on_file(self, runner: CliRunner) -> None:
        _construct(runner, "--partition", "3,2", "--out", "tbp.json")
        result = runner.invoke(cli, ["morse", "tbp.json", "--format", "json"])
        assert result.exit_code == 0, result.output
        report = json.loads(result.stdout)
        assert (report["index"], report["nullity"], report["orbit_dim"]) == (0, 0, 3)

    def test_morse_needs_one_target(self, runner: CliRunner) -> None:
        assert runner.invoke(cli, ["morse"]).exit_code == 2

    def test_crossover(self, runner: CliRunner) -> None:
        result = runner.invoke(cli, ["crossover", "--lo", "15.0", "--hi", "15.1"])
        assert result.exit_code == 0, result.output
        line = result.stdout.strip()
        assert line.startswith("s*=")
        assert float(line.removeprefix("s*=")) == pytest.approx(15.048081, abs=1e-3)

    def test_crossover_without_sign_change(self, runner: CliRunner) -> None:
        result = runner.invoke(cli, ["crossover", "--lo", "1", "--hi", "2"])
        assert result.exit_code == 3

    def test_sweep_csv(self, runner: CliRunner) -> None:
        result = runner.invoke(cli, ["sweep", "--from", "14.5", "--to", "15.5", "--step", "0.5"])
        assert result.exit_code == 0, result.output
        lines = result.stdout.splitlines()
        assert lines[0] == "s,e_tbp,t_star,e_fp_opt,gap"
        assert [line.split(",")[0] for line in lines[1:]] == ["14.5", "15", "15.5"]
