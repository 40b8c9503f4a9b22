"""Solution-separation RAIM on the scalar position problem.

Fault modes are indexed by the global station index, so a mode enumerated on a
reduced (post-exclusion) station set still refers to the original stations.
Mode 0 (no faulty station) is always first; monitored modes follow in order of
decreasing prior probability.
"""

import itertools
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.special import ndtr

from raimsim.core.numerics import Bracket, bisect_min_radius, q_inverse
from raimsim.exceptions import FaultModeError
from raimsim.models.scenario import Scenario

logger = logging.getLogger(__name__)

MIN_MONITORABLE = 3
PL_TOLERANCE = 1e-9  # meters


@dataclass(frozen=True, eq=False)
class FaultMode:
    """One fault hypothesis and the subset solution that excludes it."""

    indices: tuple[int, ...]
    p_fm: float
    w_k: float
    c_k: np.ndarray
    sigma_k: float
    sigma_ss: float = 0.0
    threshold: float = 0.0

    @property
    def estimator(self) -> np.ndarray:
        """Row vector W_k c_k^T mapping y to the subset estimate."""
        return self.w_k * self.c_k


@dataclass(frozen=True)
class BaselineResult:
    """Outcome of detection and, if needed, exclusion for one epoch."""

    estimate: float
    pl: float | None
    excluded: tuple[int, ...] = ()
    tests_run: int = 0

    @property
    def trusted(self) -> bool:
        return self.pl is not None


def all_in_view(y: Sequence[float], noise_stds: Sequence[float]) -> tuple[float, float, np.ndarray]:
    """Weighted least-squares estimate over every measurement: (x0, W_0, c_0)."""
    y = np.asarray(y, dtype=float)
    c_0 = 1.0 / np.asarray(noise_stds, dtype=float) ** 2
    w_0 = 1.0 / c_0.sum()
    return float(w_0 * np.dot(c_0, y)), float(w_0), c_0


def _mode_probability(thetas: np.ndarray, faulty: Iterable[int], healthy: Iterable[int]) -> float:
    # sorted factors keep equal-probability modes bit-identical
    return math.prod(sorted(thetas[i] for i in faulty)) * math.prod(
        sorted(1.0 - thetas[j] for j in healthy)
    )


def _build_mode(s: Scenario, active: tuple[int, ...], indices: tuple[int, ...]) -> FaultMode:
    c_k = np.zeros(s.size)
    survivors = [i for i in active if i not in indices]
    c_k[survivors] = 1.0 / s.noise_variances[survivors]
    w_k = 1.0 / c_k.sum()
    return FaultMode(
        indices=indices,
        p_fm=_mode_probability(s.thetas, indices, survivors),
        w_k=float(w_k),
        c_k=c_k,
        sigma_k=math.sqrt(w_k),
    )


def enumerate_fault_modes(s: Scenario, active: Sequence[int] | None = None) -> list[FaultMode]:
    """Mode 0 followed by every monitorable mode over ``active`` stations.

    A mode may hold up to ``len(active) - 2`` stations, further capped by
    ``s.max_fault_size`` when set.
    """
    active = tuple(range(s.size)) if active is None else tuple(sorted(active))
    if len(active) < MIN_MONITORABLE:
        raise FaultModeError(
            f"Need at least {MIN_MONITORABLE} measurements to monitor faults, got {len(active)}"
        )

    largest = len(active) - 2
    if s.max_fault_size is not None:
        largest = min(largest, s.max_fault_size)

    monitored = [
        _build_mode(s, active, indices)
        for size in range(1, largest + 1)
        for indices in itertools.combinations(active, size)
    ]
    monitored.sort(key=lambda mode: (-mode.p_fm, mode.indices))
    return [_build_mode(s, active, ()), *monitored]


def ss_test_statistics(s: Scenario, modes: Sequence[FaultMode]) -> list[FaultMode]:
    """Fill in sigma_ss and threshold T_k; P_FA is split evenly over both tails of every mode."""
    base, monitored = modes[0], modes[1:]
    if not monitored:
        raise FaultModeError("No monitored fault modes")

    k_fa = q_inverse(s.p_fa / (2 * len(monitored)))
    result = [base]
    for mode in monitored:
        gap = mode.estimator - base.estimator
        sigma_ss = math.sqrt(float(np.dot(gap**2, s.noise_variances)))
        result.append(replace(mode, sigma_ss=sigma_ss, threshold=sigma_ss * k_fa))
    return result


def subset_solution(y: Sequence[float], mode: FaultMode) -> float:
    """WLS estimate with the mode's stations removed."""
    return float(np.dot(mode.estimator, np.asarray(y, dtype=float)))


def detect(y: Sequence[float], modes: Sequence[FaultMode]) -> np.ndarray:
    """Per monitored mode: True when |x0 - x^(k)| <= T_k."""
    y = np.asarray(y, dtype=float)
    x_0 = subset_solution(y, modes[0])
    solutions = np.array([subset_solution(y, mode) for mode in modes[1:]])
    thresholds = np.array([mode.threshold for mode in modes[1:]])
    return np.abs(x_0 - solutions) <= thresholds


def pl_equation_lhs(modes: Sequence[FaultMode], pl: float) -> float:
    """2Q(PL / sigma_0) + sum_k p_k Q((PL - T_k) / sigma_k)."""
    base, monitored = modes[0], modes[1:]
    p = np.array([mode.p_fm for mode in monitored])
    t = np.array([mode.threshold for mode in monitored])
    sigma = np.array([mode.sigma_k for mode in monitored])
    return float(2.0 * ndtr(-pl / base.sigma_k) + np.dot(p, ndtr((t - pl) / sigma)))


def baseline_pl(modes: Sequence[FaultMode], tir: float) -> float:
    """Solve the PL equation for the target integrity risk; depends on the modes only."""
    base = modes[0]
    hi = 10.0 * max(base.sigma_k, *(mode.threshold + mode.sigma_k for mode in modes[1:]))
    bracket = Bracket(lo=0.0, hi=hi, tolerance=PL_TOLERANCE)
    return bisect_min_radius(lambda pl: pl_equation_lhs(modes, pl), tir, bracket)


@dataclass(frozen=True, eq=False)
class FaultModeTable:
    """Modes, thresholds and PL for one set of active stations; independent of y."""

    active: tuple[int, ...]
    modes: tuple[FaultMode, ...]
    tir: float

    @classmethod
    def build(cls, s: Scenario, active: Sequence[int] | None = None) -> "FaultModeTable":
        modes = ss_test_statistics(s, enumerate_fault_modes(s, active))
        active = tuple(range(s.size)) if active is None else tuple(sorted(active))
        logger.debug(f"Built {len(modes) - 1} fault modes over stations {active}")
        return cls(active=active, modes=tuple(modes), tir=s.tir)

    @property
    def n_fm(self) -> int:
        return len(self.modes) - 1

    @cached_property
    def protection_level(self) -> float:
        return baseline_pl(self.modes, self.tir)

    @cached_property
    def _estimators(self) -> np.ndarray:
        return np.vstack([mode.estimator for mode in self.modes])

    @cached_property
    def _thresholds(self) -> np.ndarray:
        return np.array([mode.threshold for mode in self.modes[1:]])

    def estimate(self, y: Sequence[float]) -> float:
        return subset_solution(y, self.modes[0])

    def detect(self, y: Sequence[float]) -> np.ndarray:
        """Vectorized :func:`detect` over the whole table."""
        solutions = self._estimators @ np.asarray(y, dtype=float)
        return np.abs(solutions[0] - solutions[1:]) <= self._thresholds


@dataclass
class BaselineRaim:
    """Detection and exclusion for a fixed scenario, caching one table per station set."""

    scenario: Scenario
    _tables: dict[tuple[int, ...], FaultModeTable] = field(default_factory=dict, repr=False)

    def table(self, active: Sequence[int] | None = None) -> "FaultModeTable":
        key = tuple(range(self.scenario.size)) if active is None else tuple(sorted(active))
        if key not in self._tables:
            self._tables[key] = FaultModeTable.build(self.scenario, key)
        return self._tables[key]

    def process(self, y: Sequence[float]) -> BaselineResult:
        """Detect on the full set; exclude and retry when any test fails."""
        table = self.table()
        passed = table.detect(y)
        if passed.all():
            return BaselineResult(
                estimate=table.estimate(y),
                pl=table.protection_level,
                tests_run=table.n_fm,
            )
        return self.exclude_and_retry(y, tests_run=table.n_fm)

    def exclude_and_retry(self, y: Sequence[float], tests_run: int = 0) -> BaselineResult:
        """Try each mode's exclusion in order; the first fully passing subset wins."""
        full = self.table()
        for mode in full.modes[1:]:
            survivors = tuple(i for i in full.active if i not in mode.indices)
            if len(survivors) < MIN_MONITORABLE:
                continue

            table = self.table(survivors)
            tests_run += table.n_fm
            if table.detect(y).all():
                logger.debug(f"Excluded stations {mode.indices} after {tests_run} tests")
                return BaselineResult(
                    estimate=table.estimate(y),
                    pl=table.protection_level,
                    excluded=mode.indices,
                    tests_run=tests_run,
                )

        logger.debug(f"No exclusion passed after {tests_run} tests; estimate not trusted")
        return BaselineResult(estimate=full.estimate(y), pl=None, tests_run=tests_run)
