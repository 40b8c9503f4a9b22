"""Shared pytest fixtures for raimsim tests."""

import os
from pathlib import Path

import pytest

from raimsim.models.scenario import BsParams, Scenario

SMALL_CONFIG = """\
version: "1"
scenario:
  stations: 5
  noise_std: 1.0
  theta: 0.05
  bias_std: 50.0
  tir: 0.01
run:
  epochs: 300
  seed: 42
  workers: 1
  chunk_size: 100
  pixel_size: 0.01
algorithms:
  - bayes_fe
  - bayes_nfe
  - baseline
"""


@pytest.fixture(autouse=True)
def _single_thread(monkeypatch: pytest.MonkeyPatch):
    """Keep simulations in-process unless a test asks otherwise."""
    monkeypatch.setenv("RAIM_THREADS", "1")


@pytest.fixture
def scenario5() -> Scenario:
    """Five stations, unit noise, theta 0.05, fixed bias means."""
    return Scenario.homogeneous([12.0, -30.0, 5.5, 41.0, -8.25], noise_std=1.0)


@pytest.fixture
def fault_free5() -> Scenario:
    """Five stations that never fault."""
    return Scenario.homogeneous([0.0] * 5, noise_std=1.0, theta=0.0)


@pytest.fixture
def mixed_scenario() -> Scenario:
    """Four stations with differing noise and fault priors."""
    return Scenario(
        stations=(
            BsParams(theta=0.05, bias_mean=10.0, bias_std=30.0, noise_std=1.0),
            BsParams(theta=0.10, bias_mean=-20.0, bias_std=40.0, noise_std=2.0),
            BsParams(theta=0.02, bias_mean=0.0, bias_std=50.0, noise_std=0.5),
            BsParams(theta=0.20, bias_mean=35.0, bias_std=25.0, noise_std=1.5),
        ),
        tir=1e-3,
    )


@pytest.fixture
def config_dir(tmp_path: Path) -> Path:
    """Directory containing a small raimsim.yaml."""
    (tmp_path / "raimsim.yaml").write_text(SMALL_CONFIG)
    return tmp_path


@pytest.fixture
def chdir_to_config(config_dir: Path):
    """Change directory to the config directory for the duration of the test."""
    original_dir = os.getcwd()
    os.chdir(config_dir)
    yield config_dir
    os.chdir(original_dir)
