"""Tests for the [tool.spherelab] settings."""

from pathlib import Path

import pytest

from spherelab.configs.lab import LabConfig
from spherelab.errors import ConfigFileError


@pytest.fixture(autouse=True)
def reset_lab_config(monkeypatch: pytest.MonkeyPatch):
    for name in ("SPHERELAB_DIGITS", "SPHERELAB_TOL", "SPHERELAB_OPTIMIZE__MAX_ITERS"):
        monkeypatch.delenv(name, raising=False)
    LabConfig.set_runtime_custom_path(None)
    yield
    LabConfig.set_runtime_custom_path(None)


def test_defaults_outside_a_project(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """Without a pyproject.toml every setting keeps its default."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setattr("spherelab.configs.lab.detect_pyproject_path", lambda _: None)
    config = LabConfig.load_from_disk()
    assert config.digits == 12
    assert config.tol == 1e-8
    assert config.optimize.grad_tol == 1e-11


def test_reads_tool_table_from_nearest_pyproject(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """Nested directories pick up the project table."""
    (tmp_path / "pyproject.toml").write_text(
        """
[project]
name = "experiments"

[tool.spherelab]
digits = 8
jobs = 4

[tool.spherelab.optimize]
max_iters = 250
"""
    )
    nested = tmp_path / "runs"
    nested.mkdir()
    monkeypatch.chdir(nested)

    config = LabConfig.load_from_disk()
    assert config.digits == 8
    assert config.jobs == 4
    assert config.optimize.max_iters == 250
    assert config.optimize.grad_tol == 1e-11


def test_environment_fills_unset_values(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """Environment variables apply where the file is silent."""
    (tmp_path / "pyproject.toml").write_text("[tool.spherelab]\ndigits = 9\n")
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("SPHERELAB_TOL", "1e-6")
    monkeypatch.setenv("SPHERELAB_DIGITS", "4")

    config = LabConfig.load_from_disk()
    assert config.digits == 9
    assert config.tol == 1e-6


def test_rejects_out_of_range_values(tmp_path: Path) -> None:
    path = tmp_path / "lab.toml"
    path.write_text("[tool.spherelab]\ndigits = 30\n")
    LabConfig.set_runtime_custom_path(path)
    with pytest.raises(ConfigFileError):
        LabConfig.load_from_disk()


def test_rejects_unknown_optimizer_setting(tmp_path: Path) -> None:
    path = tmp_path / "lab.toml"
    path.write_text("[tool.spherelab.optimize]\nmomentum = 0.9\n")
    LabConfig.set_runtime_custom_path(path)
    with pytest.raises(ConfigFileError):
        LabConfig.load_from_disk()


def test_command_line_overrides(tmp_path: Path) -> None:
    path = tmp_path / "lab.toml"
    path.write_text("[tool.spherelab]\nseed = 3\n")
    LabConfig.set_runtime_custom_path(path)
    config = LabConfig.load_from_disk().with_overrides(seed=None, digits=6)
    assert (config.seed, config.digits) == (3, 6)
