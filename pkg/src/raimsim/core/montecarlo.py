"""Seeded Monte-Carlo evaluation of the RAIM variants.

Epochs are split into fixed-size chunks and mapped over a process pool. Chunks
come back in submission order and every epoch draws from its own seed, so the
records are identical for any worker count.
"""

import logging
import math
import os
import time
from collections.abc import Callable, Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize

from raimsim.core.baseline import BaselineRaim
from raimsim.core.bayes import NO_EXCLUSION_THRESHOLD, run_bayes, run_message_passing
from raimsim.exceptions import AllMeasurementsExcludedError, SimulationError
from raimsim.models.records import Algorithm, AlgorithmOutcome, EpochRecord
from raimsim.models.scenario import BsParams, Epoch, Scenario, derive_epoch_seed, sample_epoch

logger = logging.getLogger(__name__)

THREADS_ENV_VAR = "RAIM_THREADS"
DEFAULT_CHUNK_SIZE = 2000
DEFAULT_PIXEL_SIZE = 0.01  # meters
DEFAULT_PERCENTILE = 0.99
NEAREST_RANK_SLACK = 1e-9
BIN_DECIMALS = 9

ProgressCallback = Callable[[int, int], None]


@dataclass(frozen=True)
class RunConfig:
    """One simulation cell: a scenario, an epoch count and a master seed."""

    scenario: Scenario
    n_epochs: int
    master_seed: int
    algorithms: tuple[Algorithm, ...] = tuple(Algorithm)
    workers: int | None = None
    chunk_size: int = DEFAULT_CHUNK_SIZE
    pixel_size: float = DEFAULT_PIXEL_SIZE
    percentile: float = DEFAULT_PERCENTILE

    def __post_init__(self) -> None:
        object.__setattr__(self, "algorithms", tuple(Algorithm(a) for a in self.algorithms))
        if self.n_epochs < 1:
            raise SimulationError(f"n_epochs must be at least 1, got {self.n_epochs}")
        if self.master_seed < 0:
            raise SimulationError(f"master_seed must be nonnegative, got {self.master_seed}")
        if not self.algorithms:
            raise SimulationError("At least one algorithm must be selected")
        if self.chunk_size < 1:
            raise SimulationError("chunk_size must be at least 1")
        if not self.pixel_size > 0.0:
            raise SimulationError("pixel_size must be positive")
        if not 0.0 < self.percentile <= 1.0:
            raise SimulationError(f"percentile must lie in (0, 1], got {self.percentile}")


@dataclass(frozen=True, eq=False)
class AlgorithmColumns:
    """Column-wise outcomes of one algorithm; missing PLs are NaN."""

    abs_error: np.ndarray
    pl: np.ndarray
    trusted: np.ndarray
    excluded_count: np.ndarray

    @classmethod
    def from_outcomes(cls, outcomes: Sequence[AlgorithmOutcome]) -> "AlgorithmColumns":
        return cls(
            abs_error=np.array([o.abs_error for o in outcomes], dtype=float),
            pl=np.array([math.nan if o.pl is None else o.pl for o in outcomes], dtype=float),
            trusted=np.array([o.trusted for o in outcomes], dtype=bool),
            excluded_count=np.array([o.excluded_count for o in outcomes], dtype=np.int64),
        )

    @classmethod
    def concatenate(cls, parts: Sequence["AlgorithmColumns"]) -> "AlgorithmColumns":
        return cls(
            abs_error=np.concatenate([p.abs_error for p in parts]),
            pl=np.concatenate([p.pl for p in parts]),
            trusted=np.concatenate([p.trusted for p in parts]),
            excluded_count=np.concatenate([p.excluded_count for p in parts]),
        )

    def __len__(self) -> int:
        return len(self.abs_error)

    @property
    def has_pl(self) -> np.ndarray:
        return ~np.isnan(self.pl)

    def outcome(self, i: int) -> AlgorithmOutcome:
        pl = None if math.isnan(self.pl[i]) else float(self.pl[i])
        return AlgorithmOutcome(
            abs_error=float(self.abs_error[i]),
            pl=pl,
            trusted=bool(self.trusted[i]),
            excluded_count=int(self.excluded_count[i]),
        )


@dataclass(frozen=True, eq=False)
class RecordBatch:
    """Consecutive epochs ``start .. start + size - 1`` for every algorithm."""

    start: int
    columns: dict[Algorithm, AlgorithmColumns]

    @property
    def size(self) -> int:
        return len(next(iter(self.columns.values())))

    @classmethod
    def concatenate(cls, batches: Sequence["RecordBatch"]) -> "RecordBatch":
        if not batches:
            raise SimulationError("No record batches to concatenate")
        algorithms = batches[0].columns.keys()
        return cls(
            start=batches[0].start,
            columns={
                a: AlgorithmColumns.concatenate([b.columns[a] for b in batches]) for a in algorithms
            },
        )

    def records(self) -> Iterator[EpochRecord]:
        for i in range(self.size):
            yield EpochRecord(
                epoch_index=self.start + i,
                outcomes={a: cols.outcome(i) for a, cols in self.columns.items()},
            )


def _bayes_outcome(s: Scenario, epoch: Epoch, threshold: float, messages) -> AlgorithmOutcome:
    try:
        result = run_bayes(s, epoch.y, theta_threshold=threshold, messages=messages)
    except AllMeasurementsExcludedError:
        return AlgorithmOutcome(abs_error=math.nan, pl=None, trusted=False, excluded_count=s.size)
    return AlgorithmOutcome(
        abs_error=abs(epoch.true_x - result.estimate),
        pl=result.pl,
        trusted=True,
        excluded_count=len(result.excluded),
    )


def evaluate_epoch(
    s: Scenario,
    epoch: Epoch,
    algorithms: Sequence[Algorithm],
    baseline: BaselineRaim | None = None,
) -> dict[Algorithm, AlgorithmOutcome]:
    """Run every requested algorithm on the same epoch."""
    outcomes: dict[Algorithm, AlgorithmOutcome] = {}
    messages = None
    if any(a.is_bayes for a in algorithms):
        messages = run_message_passing(s, epoch.y)

    for algorithm in algorithms:
        if algorithm is Algorithm.BAYES_FE:
            outcomes[algorithm] = _bayes_outcome(s, epoch, s.theta_threshold, messages)
        elif algorithm is Algorithm.BAYES_NFE:
            outcomes[algorithm] = _bayes_outcome(s, epoch, NO_EXCLUSION_THRESHOLD, messages)
        else:
            baseline = baseline or BaselineRaim(s)
            result = baseline.process(epoch.y)
            outcomes[algorithm] = AlgorithmOutcome(
                abs_error=abs(epoch.true_x - result.estimate),
                pl=result.pl,
                trusted=result.trusted,
                excluded_count=len(result.excluded),
            )
    return outcomes


def _simulate_chunk(task: tuple[Scenario, tuple[Algorithm, ...], int, int, int]) -> RecordBatch:
    s, algorithms, master_seed, start, stop = task
    baseline = BaselineRaim(s) if Algorithm.BASELINE in algorithms else None

    per_algorithm: dict[Algorithm, list[AlgorithmOutcome]] = {a: [] for a in algorithms}
    for index in range(start, stop):
        epoch = sample_epoch(s, derive_epoch_seed(master_seed, index))
        for algorithm, outcome in evaluate_epoch(s, epoch, algorithms, baseline).items():
            per_algorithm[algorithm].append(outcome)

    return RecordBatch(
        start=start,
        columns={a: AlgorithmColumns.from_outcomes(o) for a, o in per_algorithm.items()},
    )


def _resolve_workers(requested: int | None) -> int:
    """Worker count: requested (or CPU count), capped by RAIM_THREADS when set."""
    workers = requested or os.cpu_count() or 1
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw:
        try:
            cap = int(raw)
        except ValueError:
            logger.warning(f"Ignoring {THREADS_ENV_VAR}={raw!r}: not an integer")
        else:
            if cap >= 1:
                workers = min(workers, cap)
            else:
                logger.warning(f"Ignoring {THREADS_ENV_VAR}={raw!r}: must be at least 1")
    return max(1, workers)


@dataclass(frozen=True, eq=False)
class StanfordHistogram:
    """Counts over (abs_error, PL) pixels for epochs that produced a PL."""

    pixel_size: float
    counts: dict[tuple[int, int], int]
    failures: int
    total: int

    def merge(self, other: "StanfordHistogram") -> "StanfordHistogram":
        if self.pixel_size != other.pixel_size:
            raise SimulationError("Cannot merge histograms with different pixel sizes")
        counts = dict(self.counts)
        for key, count in other.counts.items():
            counts[key] = counts.get(key, 0) + count
        return StanfordHistogram(
            pixel_size=self.pixel_size,
            counts=dict(sorted(counts.items())),
            failures=self.failures + other.failures,
            total=self.total + other.total,
        )


def stanford_bins(columns: AlgorithmColumns, pixel_size: float) -> StanfordHistogram:
    """Bin (abs_error, PL) pairs by ``floor(value / pixel_size)``.

    The ratio is rounded to 9 decimals first so exact multiples of the pixel
    land in their own bin despite binary representation error.
    """
    if not pixel_size > 0.0:
        raise SimulationError("pixel_size must be positive")

    mask = columns.has_pl
    errors, pls = columns.abs_error[mask], columns.pl[mask]
    if not mask.any():
        return StanfordHistogram(pixel_size=pixel_size, counts={}, failures=0, total=0)

    error_bins = np.floor(np.round(errors / pixel_size, BIN_DECIMALS)).astype(np.int64)
    pl_bins = np.floor(np.round(pls / pixel_size, BIN_DECIMALS)).astype(np.int64)

    keys, counts = np.unique(np.stack([error_bins, pl_bins], axis=1), axis=0, return_counts=True)
    return StanfordHistogram(
        pixel_size=pixel_size,
        counts={(int(e), int(p)): int(c) for (e, p), c in zip(keys, counts)},
        failures=int(np.count_nonzero(pls < errors)),
        total=int(mask.sum()),
    )


@dataclass(frozen=True, eq=False)
class CcdfTable:
    """P(PL > value) at every distinct sample value, ascending."""

    values: np.ndarray
    ccdf: np.ndarray


def empirical_ccdf(samples: Sequence[float]) -> CcdfTable:
    samples = np.sort(np.asarray(samples, dtype=float))
    if samples.size == 0:
        raise SimulationError("CCDF needs at least one sample")
    values = np.unique(samples)
    above = samples.size - np.searchsorted(samples, values, side="right")
    return CcdfTable(values=values, ccdf=above / samples.size)


def nearest_rank(samples: Sequence[float], q: float) -> float:
    """Order statistic at rank ceil(q * n)."""
    ordered = np.sort(np.asarray(samples, dtype=float))
    if ordered.size == 0:
        raise SimulationError("Percentile needs at least one sample")
    rank = max(1, math.ceil(q * ordered.size - NEAREST_RANK_SLACK))
    return float(ordered[rank - 1])


def ccdf_and_percentile(samples: Sequence[float], q: float) -> tuple[CcdfTable, float]:
    return empirical_ccdf(samples), nearest_rank(samples, q)


@dataclass(frozen=True, eq=False)
class SummaryStats:
    """Per-algorithm statistics of one simulation cell."""

    algorithm: Algorithm
    epochs: int
    pl_count: int
    integrity_failures: int
    simulated_ir: float
    no_trust_rate: float
    pl_p99: float
    mean_pl: float
    stanford: StanfordHistogram
    ccdf: CcdfTable | None


def summarize(
    algorithm: Algorithm,
    columns: AlgorithmColumns,
    pixel_size: float = DEFAULT_PIXEL_SIZE,
    percentile: float = DEFAULT_PERCENTILE,
) -> SummaryStats:
    """IR over epochs with a PL; epochs without one count toward no_trust_rate."""
    histogram = stanford_bins(columns, pixel_size)
    pls = columns.pl[columns.has_pl]
    epochs = len(columns)

    if pls.size:
        ccdf, p99 = ccdf_and_percentile(pls, percentile)
        mean_pl = float(pls.mean())
        simulated_ir = histogram.failures / histogram.total
    else:
        ccdf, p99, mean_pl, simulated_ir = None, math.nan, math.nan, math.nan

    untrusted = epochs - histogram.total
    if untrusted:
        logger.warning(f"{algorithm}: {untrusted} of {epochs} epochs returned no PL")

    return SummaryStats(
        algorithm=algorithm,
        epochs=epochs,
        pl_count=histogram.total,
        integrity_failures=histogram.failures,
        simulated_ir=simulated_ir,
        no_trust_rate=untrusted / epochs,
        pl_p99=p99,
        mean_pl=mean_pl,
        stanford=histogram,
        ccdf=ccdf,
    )


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Records and summaries of one cell."""

    config: RunConfig
    batch: RecordBatch
    summaries: dict[Algorithm, SummaryStats]
    workers: int


def run(config: RunConfig, progress_callback: ProgressCallback | None = None) -> SimulationResult:
    """Simulate ``config.n_epochs`` epochs and summarize every algorithm."""
    workers = _resolve_workers(config.workers)
    tasks = [
        (config.scenario, config.algorithms, config.master_seed, start,
         min(start + config.chunk_size, config.n_epochs))
        for start in range(0, config.n_epochs, config.chunk_size)
    ]
    logger.info(
        f"Simulating {config.n_epochs} epochs of M={config.scenario.size} "
        f"in {len(tasks)} chunks on {workers} workers"
    )

    batches: list[RecordBatch] = []

    def collect(batches_iter: Iterator[RecordBatch]) -> None:
        done = 0
        for batch in batches_iter:
            batches.append(batch)
            done += batch.size
            if progress_callback:
                progress_callback(done, config.n_epochs)

    if workers == 1 or len(tasks) == 1:
        collect(map(_simulate_chunk, tasks))
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            collect(pool.map(_simulate_chunk, tasks))

    batch = RecordBatch.concatenate(batches)
    summaries = {
        a: summarize(a, batch.columns[a], config.pixel_size, config.percentile)
        for a in config.algorithms
    }
    return SimulationResult(config=config, batch=batch, summaries=summaries, workers=workers)


def derive_cell_seed(master_seed: int, stations: int, noise_std: float) -> int:
    """Seed of one sweep cell; noise_std enters at micrometer resolution."""
    sequence = np.random.SeedSequence([master_seed, stations, round(noise_std * 1e6)])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def draw_bias_means(cell_seed: int, stations: int, half_width: float) -> np.ndarray:
    """Fault bias means m_b ~ U[-half_width, half_width], fixed for the cell."""
    return np.random.default_rng(cell_seed).uniform(-half_width, half_width, stations)


def cell_scenario(
    template: Scenario,
    stations: int,
    noise_std: float,
    bias_means: Sequence[float],
) -> Scenario:
    """Homogeneous scenario for one cell, taking theta and bias_std from ``template``."""
    if len(bias_means) != stations:
        raise SimulationError(f"Expected {stations} bias means, got {len(bias_means)}")
    first = template.stations[0]
    params = tuple(
        BsParams(theta=first.theta, bias_mean=float(m), bias_std=first.bias_std, noise_std=noise_std)
        for m in bias_means
    )
    return replace(template, stations=params)


@dataclass(frozen=True, eq=False)
class CellResult:
    """One (M, noise_std) sweep cell with its derived seed and drawn bias means."""

    stations: int
    noise_std: float
    cell_seed: int
    bias_means: tuple[float, ...]
    scenario: Scenario
    result: SimulationResult


def run_sweep(
    template: RunConfig,
    cells: Sequence[tuple[int, float]],
    half_width: float,
    bias_means: Sequence[float] | None = None,
    on_cell: Callable[[str, str], None] | None = None,
    on_epochs: ProgressCallback | None = None,
) -> list[CellResult]:
    """Run ``template`` once per (M, noise_std) cell.

    Each cell gets its own seed from (master_seed, M, noise_std); that seed
    draws the cell's m_b values (unless ``bias_means`` fixes them) and then
    seeds the cell's epochs.
    """
    results = []
    for stations, noise_std in cells:
        name = f"M={stations}, sigma_n={noise_std:g}"
        if on_cell:
            on_cell(name, "starting")

        cell_seed = derive_cell_seed(template.master_seed, stations, noise_std)
        means = (
            np.asarray(bias_means, dtype=float)
            if bias_means is not None
            else draw_bias_means(cell_seed, stations, half_width)
        )
        scenario = cell_scenario(template.scenario, stations, noise_std, means)
        try:
            result = run(replace(template, scenario=scenario, master_seed=cell_seed), on_epochs)
        except Exception:
            if on_cell:
                on_cell(name, "failed")
            raise

        results.append(
            CellResult(
                stations=stations,
                noise_std=noise_std,
                cell_seed=cell_seed,
                bias_means=tuple(float(m) for m in means),
                scenario=scenario,
                result=result,
            )
        )
        if on_cell:
            on_cell(name, "completed")
    return results


@dataclass(frozen=True)
class ComplexityBenchmark:
    """Per-epoch message-passing cost over a range of station counts.

    Operation counts are fitted as ``2**(slope M)`` on a log scale. Wall time
    carries a fixed per-epoch interpreter cost, so it is fitted as
    ``c0 + c1 r**M`` and ``r`` is reported.
    """

    stations: tuple[int, ...]
    seconds_per_epoch: tuple[float, ...]
    operations: tuple[int, ...]

    @property
    def time_growth_base(self) -> float:
        m = np.asarray(self.stations, dtype=float) - self.stations[0]
        t = np.asarray(self.seconds_per_epoch, dtype=float) / self.seconds_per_epoch[0]
        (_, _, base), _ = optimize.curve_fit(
            lambda m, c0, c1, r: c0 + c1 * r**m,
            m,
            t,
            p0=(0.5, 0.5, 2.0),
            sigma=t,
            bounds=([0.0, 0.0, 1.0], [np.inf, np.inf, 4.0]),
        )
        return float(base)

    @property
    def operation_growth_base(self) -> float:
        slope, _ = np.polyfit(np.asarray(self.stations, dtype=float), np.log2(self.operations), 1)
        return float(2.0**slope)


def benchmark_bayes(
    stations: Sequence[int] = range(5, 11),
    epochs: int = 50,
    noise_std: float = 1.0,
    theta: float = 0.05,
    seed: int = 0,
) -> ComplexityBenchmark:
    """Time message passing plus both PL solves for each station count."""
    seconds, operations = [], []
    for m in stations:
        s = Scenario.homogeneous(
            draw_bias_means(derive_cell_seed(seed, m, noise_std), m, 50.0),
            noise_std=noise_std,
            theta=theta,
        )
        epochs_y = [sample_epoch(s, derive_epoch_seed(seed, i)).y for i in range(epochs)]

        started = time.perf_counter()
        count = 0
        for y in epochs_y:
            messages = run_message_passing(s, y)
            count = messages.component_operations
            for threshold in (s.theta_threshold, NO_EXCLUSION_THRESHOLD):
                try:
                    run_bayes(s, y, theta_threshold=threshold, messages=messages)
                except AllMeasurementsExcludedError:
                    pass
        seconds.append((time.perf_counter() - started) / epochs)
        operations.append(count)
        logger.debug(f"M={m}: {seconds[-1] * 1e3:.3f} ms/epoch, {count} component operations")

    return ComplexityBenchmark(
        stations=tuple(stations),
        seconds_per_epoch=tuple(seconds),
        operations=tuple(operations),
    )
