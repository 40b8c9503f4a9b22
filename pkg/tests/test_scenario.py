"""Tests for scenario parameters, seeding and epoch sampling."""

import logging

import numpy as np
import pytest

from raimsim.exceptions import ScenarioError
from raimsim.models.scenario import (
    BsParams,
    FlatPrior,
    GaussianPrior,
    Scenario,
    bias_prior_mixture,
    derive_epoch_seed,
    sample_epoch,
)


class TestBsParams:
    """Tests for BsParams validation."""

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"theta": -0.1, "bias_mean": 0.0, "bias_std": 50.0, "noise_std": 1.0},
            {"theta": 1.1, "bias_mean": 0.0, "bias_std": 50.0, "noise_std": 1.0},
            {"theta": 0.1, "bias_mean": 0.0, "bias_std": 0.0, "noise_std": 1.0},
            {"theta": 0.1, "bias_mean": 0.0, "bias_std": 50.0, "noise_std": -1.0},
        ],
    )
    def test_invalid_parameters(self, kwargs):
        """Test that out-of-range parameters raise ScenarioError."""
        with pytest.raises(ScenarioError):
            BsParams(**kwargs)

    def test_theta_bounds_allowed(self):
        """Test that theta 0 and 1 are valid."""
        BsParams(theta=0.0, bias_mean=0.0, bias_std=50.0, noise_std=1.0)
        BsParams(theta=1.0, bias_mean=0.0, bias_std=50.0, noise_std=1.0)

    def test_weak_bias_warns(self, caplog):
        """Test that bias_std not exceeding noise_std logs a warning."""
        with caplog.at_level(logging.WARNING, logger="raimsim.models.scenario"):
            BsParams(theta=0.1, bias_mean=0.0, bias_std=1.0, noise_std=2.0)

        assert "does not exceed noise_std" in caplog.text


class TestScenario:
    """Tests for Scenario construction."""

    def test_homogeneous(self):
        """Test the homogeneous constructor and array views."""
        s = Scenario.homogeneous([1.0, 2.0, 3.0], noise_std=2.0, theta=0.1, bias_std=40.0)

        assert s.size == 3
        np.testing.assert_array_equal(s.bias_means, [1.0, 2.0, 3.0])
        np.testing.assert_array_equal(s.noise_variances, [4.0, 4.0, 4.0])
        np.testing.assert_array_equal(s.thetas, [0.1, 0.1, 0.1])
        assert isinstance(s.prior_x, FlatPrior)

    def test_defaults(self, scenario5):
        """Test the desk-scale defaults."""
        assert scenario5.tir == 1e-2
        assert scenario5.theta_threshold == 0.5
        assert scenario5.p_fa == 0.05
        assert scenario5.max_fault_size is None

    def test_empty_rejected(self):
        """Test that a scenario needs a station."""
        with pytest.raises(ScenarioError):
            Scenario(stations=())

    @pytest.mark.parametrize("tir", [0.0, 1.0])
    def test_tir_range(self, tir):
        """Test that tir must lie strictly inside (0, 1)."""
        with pytest.raises(ScenarioError):
            Scenario.homogeneous([0.0] * 3, noise_std=1.0, tir=tir)

    def test_gaussian_prior_variance(self):
        """Test that a Gaussian prior needs a positive variance."""
        with pytest.raises(ScenarioError):
            GaussianPrior(mean=0.0, variance=0.0)


class TestSeeding:
    """Tests for derive_epoch_seed and sample_epoch."""

    def test_seed_is_deterministic(self):
        """Test that the same inputs give the same seed."""
        assert derive_epoch_seed(42, 7) == derive_epoch_seed(42, 7)
        assert derive_epoch_seed(42, 7) != derive_epoch_seed(42, 8)
        assert derive_epoch_seed(42, 7) != derive_epoch_seed(43, 7)

    def test_seed_fits_64_bits(self):
        """Test that seeds are 64-bit unsigned integers."""
        seed = derive_epoch_seed(2**63, 10**9)

        assert 0 <= seed < 2**64

    def test_negative_rejected(self):
        """Test that negative seeds are rejected."""
        with pytest.raises(ScenarioError):
            derive_epoch_seed(-1, 0)

    def test_sample_is_reproducible(self, scenario5):
        """Test that a seed fully determines the epoch."""
        a = sample_epoch(scenario5, 1234)
        b = sample_epoch(scenario5, 1234)

        np.testing.assert_array_equal(a.y, b.y)
        np.testing.assert_array_equal(a.faults, b.faults)

    def test_measurement_identity(self, scenario5):
        """Test that y = true_x + bias + noise exactly, with zero bias when not faulty."""
        for index in range(50):
            epoch = sample_epoch(scenario5, derive_epoch_seed(5, index))

            np.testing.assert_array_equal(epoch.y, epoch.true_x + epoch.bias + epoch.noise)
            assert np.all(epoch.bias[epoch.faults == 0] == 0.0)

    def test_theta_zero_never_faults(self, fault_free5):
        """Test that theta 0 gives no faults."""
        for index in range(200):
            assert not sample_epoch(fault_free5, index).faults.any()

    def test_theta_one_always_faults(self):
        """Test that theta 1 faults every station."""
        s = Scenario.homogeneous([10.0] * 4, noise_std=1.0, theta=1.0)

        for index in range(50):
            assert sample_epoch(s, index).faults.all()

    def test_fault_rate(self, scenario5):
        """Test that the empirical fault rate is close to theta."""
        faults = np.array(
            [sample_epoch(scenario5, derive_epoch_seed(3, i)).faults for i in range(4000)]
        )
        rate = faults.mean()
        stderr = np.sqrt(0.05 * 0.95 / faults.size)

        assert abs(rate - 0.05) < 4 * stderr


class TestBiasPriorMixture:
    """Tests for bias_prior_mixture."""

    def test_two_components(self):
        """Test the delta plus Gaussian components."""
        m = bias_prior_mixture(BsParams(theta=0.05, bias_mean=20.0, bias_std=10.0, noise_std=1.0))

        np.testing.assert_allclose(m.weights, [0.95, 0.05])
        np.testing.assert_array_equal(m.means, [0.0, 20.0])
        np.testing.assert_array_equal(m.variances, [0.0, 100.0])

    def test_theta_zero_is_delta(self):
        """Test that theta 0 leaves a single delta at zero."""
        m = bias_prior_mixture(BsParams(theta=0.0, bias_mean=20.0, bias_std=10.0, noise_std=1.0))

        assert len(m) == 1
        assert m.variances[0] == 0.0

    def test_theta_one_is_gaussian(self):
        """Test that theta 1 leaves only the fault Gaussian."""
        m = bias_prior_mixture(BsParams(theta=1.0, bias_mean=20.0, bias_std=10.0, noise_std=1.0))

        assert len(m) == 1
        assert m.means[0] == 20.0
