"""Pydantic models for raimsim.yaml configuration."""

from collections.abc import Sequence
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from raimsim.models.records import Algorithm
from raimsim.models.scenario import BsParams, FlatPrior, GaussianPrior, PriorX, Scenario


class PriorSettings(BaseModel):
    """Prior on the position x."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["flat", "gaussian"] = "flat"
    mean: float = 0.0
    variance: float | None = Field(default=None, gt=0.0)

    @model_validator(mode="after")
    def _gaussian_needs_variance(self) -> "PriorSettings":
        if self.kind == "gaussian" and self.variance is None:
            raise ValueError("a gaussian prior needs a variance")
        return self

    def to_prior(self) -> PriorX:
        if self.kind == "flat":
            return FlatPrior()
        return GaussianPrior(mean=self.mean, variance=self.variance)


class ScenarioSettings(BaseModel):
    """Station model and integrity requirements."""

    model_config = ConfigDict(extra="forbid")

    stations: int = Field(default=5, ge=3)
    noise_std: float = Field(default=1.0, gt=0.0)
    theta: float = Field(default=0.05, ge=0.0, le=1.0)
    bias_std: float = Field(default=50.0, gt=0.0)
    bias_mean_half_width: float = Field(default=50.0, ge=0.0)
    bias_means: list[float] | None = None
    tir: float = Field(default=1e-2, gt=0.0, lt=1.0)
    theta_threshold: float = Field(default=0.5, ge=0.0, le=1.0)
    p_fa: float = Field(default=5e-2, gt=0.0, lt=1.0)
    prior_x: PriorSettings = Field(default_factory=PriorSettings)
    true_x: float = 0.0
    max_fault_size: int | None = Field(default=None, ge=1)

    def to_scenario(self, stations: int, noise_std: float, bias_means: Sequence[float]) -> Scenario:
        """Homogeneous scenario for one (M, noise_std) cell."""
        params = tuple(
            BsParams(
                theta=self.theta,
                bias_mean=float(m),
                bias_std=self.bias_std,
                noise_std=noise_std,
            )
            for m in bias_means[:stations]
        )
        return Scenario(
            stations=params,
            tir=self.tir,
            theta_threshold=self.theta_threshold,
            p_fa=self.p_fa,
            prior_x=self.prior_x.to_prior(),
            true_x=self.true_x,
            max_fault_size=self.max_fault_size,
        )


class SweepCell(BaseModel):
    """One (M, noise_std) point of a sweep."""

    model_config = ConfigDict(extra="forbid")

    stations: int = Field(ge=3)
    noise_std: float = Field(gt=0.0)


class RunSettings(BaseModel):
    """Epoch count, seeding, parallelism and output options."""

    model_config = ConfigDict(extra="forbid")

    epochs: int = Field(default=200_000, ge=1)
    seed: int = Field(default=42, ge=0, lt=2**64)
    workers: int | None = Field(default=None, ge=1)
    chunk_size: int = Field(default=2000, ge=1)
    pixel_size: float = Field(default=0.01, gt=0.0)
    percentile: float = Field(default=0.99, gt=0.0, le=1.0)
    write_records: bool = True
    sweep: list[SweepCell] | None = None


class RaimsimConfig(BaseModel):
    """Root configuration model for raimsim.yaml."""

    model_config = ConfigDict(extra="forbid")

    version: str = "1"
    scenario: ScenarioSettings = Field(default_factory=ScenarioSettings)
    run: RunSettings = Field(default_factory=RunSettings)
    algorithms: list[Algorithm] = Field(default_factory=lambda: list(Algorithm), min_length=1)

    @model_validator(mode="after")
    def _check_consistency(self) -> "RaimsimConfig":
        self.algorithms = list(dict.fromkeys(self.algorithms))
        if self.scenario.bias_means is not None:
            for stations, _ in self.cells():
                if len(self.scenario.bias_means) != stations:
                    raise ValueError(
                        f"scenario.bias_means has {len(self.scenario.bias_means)} entries "
                        f"but a cell uses {stations} stations"
                    )
        return self

    def cells(self) -> list[tuple[int, float]]:
        """Sweep cells, or the single scenario cell when no sweep is given."""
        if self.run.sweep:
            return [(cell.stations, cell.noise_std) for cell in self.run.sweep]
        return [(self.scenario.stations, self.scenario.noise_std)]

    def with_overrides(
        self,
        seed: int | None = None,
        epochs: int | None = None,
        algorithms: Sequence[Algorithm] | None = None,
    ) -> "RaimsimConfig":
        """Copy with CLI overrides applied and revalidated."""
        data = self.model_dump(mode="json")
        if seed is not None:
            data["run"]["seed"] = seed
        if epochs is not None:
            data["run"]["epochs"] = epochs
        if algorithms is not None:
            data["algorithms"] = [str(a) for a in algorithms]
        return RaimsimConfig.model_validate(data)

    def to_yaml_dict(self) -> dict:
        """Convert to dictionary suitable for YAML output."""
        return self.model_dump(mode="json")


DEFAULT_CONFIG = RaimsimConfig()
