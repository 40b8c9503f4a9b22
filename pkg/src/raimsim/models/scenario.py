"""Scenario definition and epoch sampling for the model y_i = x + b_i + n_i."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from raimsim.core.numerics import GaussianMixture
from raimsim.exceptions import ScenarioError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BsParams:
    """Per-station fault prior, bias distribution and noise level (meters)."""

    theta: float
    bias_mean: float
    bias_std: float
    noise_std: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= 1.0:
            raise ScenarioError(f"theta must lie in [0, 1], got {self.theta}")
        if not self.bias_std > 0.0:
            raise ScenarioError(f"bias_std must be positive, got {self.bias_std}")
        if not self.noise_std > 0.0:
            raise ScenarioError(f"noise_std must be positive, got {self.noise_std}")
        if self.bias_std <= self.noise_std:
            logger.warning(
                f"bias_std {self.bias_std} does not exceed noise_std {self.noise_std}; "
                "faults will be hard to tell apart from noise"
            )

    @property
    def noise_variance(self) -> float:
        return self.noise_std**2

    @property
    def bias_variance(self) -> float:
        return self.bias_std**2


@dataclass(frozen=True)
class FlatPrior:
    """Improper uniform prior on x; acts as the unit message in products."""


@dataclass(frozen=True)
class GaussianPrior:
    """Gaussian prior N(x; mean, variance)."""

    mean: float
    variance: float

    def __post_init__(self) -> None:
        if not self.variance > 0.0:
            raise ScenarioError(f"Prior variance must be positive, got {self.variance}")

    def as_mixture(self) -> GaussianMixture:
        return GaussianMixture.single(self.mean, self.variance)


PriorX = FlatPrior | GaussianPrior


@dataclass(frozen=True)
class Scenario:
    """Station parameters plus the integrity and detection requirements."""

    stations: tuple[BsParams, ...]
    tir: float = 1e-2
    theta_threshold: float = 0.5
    p_fa: float = 5e-2
    prior_x: PriorX = field(default_factory=FlatPrior)
    true_x: float = 0.0
    max_fault_size: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "stations", tuple(self.stations))
        if not self.stations:
            raise ScenarioError("A scenario needs at least one station")
        if not 0.0 < self.tir < 1.0:
            raise ScenarioError(f"tir must lie in (0, 1), got {self.tir}")
        if not 0.0 <= self.theta_threshold <= 1.0:
            raise ScenarioError(f"theta_threshold must lie in [0, 1], got {self.theta_threshold}")
        if not 0.0 < self.p_fa < 1.0:
            raise ScenarioError(f"p_fa must lie in (0, 1), got {self.p_fa}")
        if self.max_fault_size is not None and self.max_fault_size < 1:
            raise ScenarioError("max_fault_size must be at least 1 when set")

    @classmethod
    def homogeneous(
        cls,
        bias_means: Sequence[float],
        noise_std: float,
        theta: float = 0.05,
        bias_std: float = 50.0,
        **kwargs,
    ) -> "Scenario":
        """Scenario where every station shares theta, bias_std and noise_std."""
        stations = tuple(
            BsParams(theta=theta, bias_mean=float(m), bias_std=bias_std, noise_std=noise_std)
            for m in bias_means
        )
        return cls(stations=stations, **kwargs)

    @property
    def size(self) -> int:
        return len(self.stations)

    @property
    def thetas(self) -> np.ndarray:
        return np.array([s.theta for s in self.stations])

    @property
    def bias_means(self) -> np.ndarray:
        return np.array([s.bias_mean for s in self.stations])

    @property
    def bias_stds(self) -> np.ndarray:
        return np.array([s.bias_std for s in self.stations])

    @property
    def noise_stds(self) -> np.ndarray:
        return np.array([s.noise_std for s in self.stations])

    @property
    def noise_variances(self) -> np.ndarray:
        return self.noise_stds**2


@dataclass(frozen=True, eq=False)
class Epoch:
    """One realization of the measurement model."""

    true_x: float
    faults: np.ndarray
    bias: np.ndarray
    noise: np.ndarray
    y: np.ndarray


def derive_epoch_seed(master_seed: int, epoch_index: int) -> int:
    """Independent 64-bit seed for one epoch of a run."""
    if master_seed < 0 or epoch_index < 0:
        raise ScenarioError("Seeds and epoch indices must be nonnegative")
    sequence = np.random.SeedSequence([master_seed, epoch_index])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def sample_epoch(s: Scenario, rng_seed: int) -> Epoch:
    """Draw fault indicators, biases, noises and measurements for one epoch.

    Every draw is made for every station regardless of the outcome, so the
    stream layout of a seed does not depend on the fault pattern.
    """
    rng = np.random.default_rng(rng_seed)
    faults = rng.random(s.size) < s.thetas
    bias_draw = rng.normal(s.bias_means, s.bias_stds)
    noise = rng.normal(0.0, s.noise_stds)

    bias = np.where(faults, bias_draw, 0.0)
    y = s.true_x + bias + noise
    return Epoch(
        true_x=s.true_x,
        faults=faults.astype(np.int8),
        bias=bias,
        noise=noise,
        y=y,
    )


def bias_prior_mixture(b: BsParams) -> GaussianMixture:
    """(1 - theta) delta(b) + theta N(b; m_b, sigma_b^2), zero-weight terms dropped."""
    components = [
        (1.0 - b.theta, 0.0, 0.0),
        (b.theta, b.bias_mean, b.bias_variance),
    ]
    live = [c for c in components if c[0] > 0.0]
    weights, means, variances = zip(*live)
    return GaussianMixture(weights, means, variances)
