"""CSV emission for summaries, Stanford diagrams, PL CCDFs and per-epoch records.

Floats are written in shortest round-trip form so that rerunning a seeded
configuration reproduces the files byte for byte.
"""

import csv
import logging
import math
from collections.abc import Iterable, Sequence
from pathlib import Path

from raimsim.core.montecarlo import CellResult, SummaryStats
from raimsim.exceptions import OutputError
from raimsim.models.records import Algorithm

logger = logging.getLogger(__name__)

SUMMARY_FILENAME = "summary.csv"
SUMMARY_COLUMNS = [
    "stations",
    "noise_std",
    "algorithm",
    "epochs",
    "pl_count",
    "integrity_failures",
    "simulated_ir",
    "no_trust_rate",
    "pl_p99",
    "mean_pl",
]
RECORD_FIELDS = ["abs_error", "pl", "trusted", "excluded_count"]


def format_float(value: float) -> str:
    value = float(value)
    if math.isnan(value):
        return "nan"
    return repr(value)


def cell_tag(stations: int, noise_std: float) -> str:
    """``<M>_<sigma_n>`` with integral noise levels written without a decimal point."""
    noise = int(noise_std) if float(noise_std).is_integer() else format_float(noise_std)
    return f"{stations}_{noise}"


def summary_row(cell: CellResult, stats: SummaryStats) -> list[str]:
    return [
        str(cell.stations),
        format_float(cell.noise_std),
        str(stats.algorithm),
        str(stats.epochs),
        str(stats.pl_count),
        str(stats.integrity_failures),
        format_float(stats.simulated_ir),
        format_float(stats.no_trust_rate),
        format_float(stats.pl_p99),
        format_float(stats.mean_pl),
    ]


class ReportWriter:
    """Writes one run's CSV files into an output directory."""

    def __init__(self, output_dir: Path):
        self.output_dir = output_dir

    def prepare(self) -> None:
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise OutputError(f"Cannot create output directory {self.output_dir}: {e}") from e

    def _write(self, name: str, rows: Iterable[Sequence[str]]) -> str:
        path = self.output_dir / name
        try:
            with open(path, "w", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerows(rows)
        except OSError as e:
            raise OutputError(f"Failed to write {path}: {e}") from e
        logger.debug(f"Wrote {path}")
        return name

    def write_summary(self, cells: Sequence[CellResult]) -> str:
        rows = [SUMMARY_COLUMNS]
        for cell in cells:
            for stats in cell.result.summaries.values():
                rows.append(summary_row(cell, stats))
        return self._write(SUMMARY_FILENAME, rows)

    def write_stanford(self, cell: CellResult, algorithm: Algorithm) -> str:
        histogram = cell.result.summaries[algorithm].stanford
        rows = [["pixel_size", format_float(histogram.pixel_size)], ["error_bin", "pl_bin", "count"]]
        rows += [[str(e), str(p), str(c)] for (e, p), c in sorted(histogram.counts.items())]
        return self._write(f"stanford_{algorithm}_{cell_tag(cell.stations, cell.noise_std)}.csv", rows)

    def write_ccdf(self, cell: CellResult, algorithm: Algorithm) -> str:
        table = cell.result.summaries[algorithm].ccdf
        rows = [["pl_meters", "ccdf"]]
        if table is not None:
            rows += [[format_float(v), format_float(c)] for v, c in zip(table.values, table.ccdf)]
        return self._write(f"ccdf_{algorithm}_{cell_tag(cell.stations, cell.noise_std)}.csv", rows)

    def write_records(self, cell: CellResult) -> str:
        batch = cell.result.batch
        algorithms = list(batch.columns)
        header = ["epoch"] + [f"{a}_{name}" for a in algorithms for name in RECORD_FIELDS]

        def rows():
            yield header
            for record in batch.records():
                row = [str(record.epoch_index)]
                for a in algorithms:
                    outcome = record.outcomes[a]
                    row += [
                        format_float(outcome.abs_error),
                        "" if outcome.pl is None else format_float(outcome.pl),
                        "1" if outcome.trusted else "0",
                        str(outcome.excluded_count),
                    ]
                yield row

        return self._write(f"records_{cell_tag(cell.stations, cell.noise_std)}.csv", rows())

    def write_cell(self, cell: CellResult, write_records: bool = True) -> list[str]:
        """Stanford and CCDF files per algorithm, plus records when requested."""
        files = []
        for algorithm in cell.result.summaries:
            files.append(self.write_stanford(cell, algorithm))
            files.append(self.write_ccdf(cell, algorithm))
        if write_records:
            files.append(self.write_records(cell))
        return files


def read_summary(path: Path) -> list[dict[str, str | int | float]]:
    """Parse a summary CSV back into typed rows."""
    integer_columns = {"stations", "epochs", "pl_count", "integrity_failures"}
    try:
        with open(path, newline="") as f:
            rows = list(csv.DictReader(f))
    except OSError as e:
        raise OutputError(f"Failed to read {path}: {e}") from e

    parsed = []
    for row in rows:
        parsed.append(
            {
                key: value if key == "algorithm" else int(value) if key in integer_columns else float(value)
                for key, value in row.items()
            }
        )
    return parsed
