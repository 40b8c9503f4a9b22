"""Tests for configuration loading and validation."""

from pathlib import Path

import pytest

from raimsim.config.loader import ConfigLoader, load_config
from raimsim.config.schema import DEFAULT_CONFIG, RaimsimConfig
from raimsim.exceptions import ConfigNotFoundError, ConfigValidationError
from raimsim.models.records import Algorithm
from raimsim.models.scenario import FlatPrior, GaussianPrior


class TestConfigLoader:
    """Tests for ConfigLoader."""

    def test_load(self, config_dir: Path):
        """Test loading the small fixture config."""
        config = load_config(config_dir / "raimsim.yaml")

        assert config.scenario.stations == 5
        assert config.run.epochs == 300
        assert config.run.workers == 1
        assert config.algorithms == list(Algorithm)

    def test_missing_file(self, tmp_path: Path):
        """Test that a missing file raises ConfigNotFoundError."""
        with pytest.raises(ConfigNotFoundError):
            ConfigLoader(tmp_path / "raimsim.yaml").load()

    def test_yaml_syntax_error_has_location(self, tmp_path: Path):
        """Test that YAML syntax errors report line and column."""
        path = tmp_path / "raimsim.yaml"
        path.write_text("scenario:\n  stations: [5\n")

        with pytest.raises(ConfigValidationError, match="line"):
            ConfigLoader(path).load()

    def test_field_errors_are_dotted(self, tmp_path: Path):
        """Test that schema errors name the offending field."""
        path = tmp_path / "raimsim.yaml"
        path.write_text("scenario:\n  stations: 2\nrun:\n  epochs: 0\n")

        with pytest.raises(ConfigValidationError) as exc_info:
            ConfigLoader(path).load()

        message = str(exc_info.value)
        assert "scenario.stations" in message
        assert "run.epochs" in message

    def test_unknown_key_rejected(self, tmp_path: Path):
        """Test that unknown keys are rejected."""
        path = tmp_path / "raimsim.yaml"
        path.write_text("scenario:\n  statons: 5\n")

        with pytest.raises(ConfigValidationError, match="scenario.statons"):
            ConfigLoader(path).load()

    def test_non_mapping_rejected(self, tmp_path: Path):
        """Test that a scalar document is rejected."""
        path = tmp_path / "raimsim.yaml"
        path.write_text("42\n")

        with pytest.raises(ConfigValidationError):
            ConfigLoader(path).load()

    def test_save_round_trip(self, tmp_path: Path):
        """Test that a saved default config loads back unchanged."""
        loader = ConfigLoader(tmp_path / "raimsim.yaml")
        loader.save(DEFAULT_CONFIG)

        assert loader.load() == DEFAULT_CONFIG


class TestRaimsimConfig:
    """Tests for the configuration schema."""

    def test_defaults(self):
        """Test desk-scale defaults."""
        config = RaimsimConfig()

        assert config.scenario.tir == 1e-2
        assert config.run.epochs == 200_000
        assert config.run.pixel_size == 0.01
        assert config.cells() == [(5, 1.0)]

    def test_sweep_cells(self):
        """Test that a sweep replaces the single cell."""
        config = RaimsimConfig.model_validate(
            {"run": {"sweep": [{"stations": 5, "noise_std": 1}, {"stations": 8, "noise_std": 9}]}}
        )

        assert config.cells() == [(5, 1.0), (8, 9.0)]

    def test_bias_means_length_checked(self):
        """Test that explicit bias means must match every cell's M."""
        with pytest.raises(ValueError):
            RaimsimConfig.model_validate({"scenario": {"stations": 4, "bias_means": [1, 2, 3]}})

    def test_duplicate_algorithms_removed(self):
        """Test that repeated algorithms collapse."""
        config = RaimsimConfig.model_validate({"algorithms": ["baseline", "baseline", "bayes_fe"]})

        assert config.algorithms == [Algorithm.BASELINE, Algorithm.BAYES_FE]

    def test_with_overrides(self):
        """Test CLI overrides on an immutable copy."""
        base = RaimsimConfig()
        config = base.with_overrides(seed=7, epochs=10, algorithms=[Algorithm.BASELINE])

        assert config.run.seed == 7
        assert config.run.epochs == 10
        assert config.algorithms == [Algorithm.BASELINE]
        assert base.run.seed == 42

    def test_invalid_override(self):
        """Test that overrides are validated."""
        with pytest.raises(ValueError):
            RaimsimConfig().with_overrides(epochs=0)

    def test_to_scenario(self):
        """Test building a cell scenario with a Gaussian prior."""
        config = RaimsimConfig.model_validate(
            {"scenario": {"prior_x": {"kind": "gaussian", "mean": 1.0, "variance": 4.0}}}
        )
        s = config.scenario.to_scenario(3, 2.0, [1.0, 2.0, 3.0])

        assert s.size == 3
        assert s.prior_x == GaussianPrior(mean=1.0, variance=4.0)
        assert s.stations[2].bias_mean == 3.0
        assert s.stations[0].noise_std == 2.0

    def test_flat_prior_default(self):
        """Test that the default prior is flat."""
        s = RaimsimConfig().scenario.to_scenario(3, 1.0, [0.0] * 3)

        assert isinstance(s.prior_x, FlatPrior)

    def test_gaussian_prior_needs_variance(self):
        """Test that a Gaussian prior without variance is rejected."""
        with pytest.raises(ValueError):
            RaimsimConfig.model_validate({"scenario": {"prior_x": {"kind": "gaussian"}}})
