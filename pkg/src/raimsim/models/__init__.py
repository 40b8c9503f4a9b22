"""Data models."""

from raimsim.models.manifest import CellManifest, ManifestManager, RunManifest
from raimsim.models.records import Algorithm, AlgorithmOutcome, EpochRecord
from raimsim.models.scenario import BsParams, Epoch, FlatPrior, GaussianPrior, Scenario

__all__ = [
    "Algorithm",
    "AlgorithmOutcome",
    "BsParams",
    "CellManifest",
    "Epoch",
    "EpochRecord",
    "FlatPrior",
    "GaussianPrior",
    "ManifestManager",
    "RunManifest",
    "Scenario",
]
