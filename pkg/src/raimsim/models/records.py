"""Algorithm identifiers and per-epoch simulation records."""

from dataclasses import dataclass
from enum import StrEnum


class Algorithm(StrEnum):
    """RAIM variants compared by the simulator."""

    BAYES_FE = "bayes_fe"
    BAYES_NFE = "bayes_nfe"
    BASELINE = "baseline"

    @property
    def is_bayes(self) -> bool:
        return self is not Algorithm.BASELINE


@dataclass(frozen=True, slots=True)
class AlgorithmOutcome:
    """What one algorithm reported for one epoch.

    ``abs_error`` is NaN when no estimate was produced at all.
    """

    abs_error: float
    pl: float | None
    trusted: bool
    excluded_count: int


@dataclass(frozen=True)
class EpochRecord:
    """Outcomes of every requested algorithm on the same epoch."""

    epoch_index: int
    outcomes: dict[Algorithm, AlgorithmOutcome]
