"""Run command: simulate every sweep cell and write the result files."""

from pathlib import Path

import typer
from pydantic import ValidationError

from raimsim.cli.commands import EXIT_RUNTIME, EXIT_USAGE
from raimsim.cli.commands.config import load_config_or_exit
from raimsim.config.loader import CONFIG_FILENAME, format_validation_error
from raimsim.config.schema import RaimsimConfig
from raimsim.core.montecarlo import CellResult, RunConfig, run_sweep
from raimsim.core.reports import SUMMARY_FILENAME, ReportWriter, format_float
from raimsim.exceptions import RaimsimError
from raimsim.models.manifest import CellManifest, ManifestManager, RunManifest
from raimsim.models.records import Algorithm
from raimsim.utils.console import (
    CellProgressReporter,
    console,
    create_table,
    print_error,
    print_success,
)


def parse_algorithms(raw: str) -> list[Algorithm]:
    """Comma-separated algorithm names, e.g. ``bayes_fe,baseline``."""
    names = [name.strip() for name in raw.split(",") if name.strip()]
    if not names:
        raise ValueError("no algorithms given")
    try:
        return [Algorithm(name) for name in names]
    except ValueError:
        valid = ", ".join(a.value for a in Algorithm)
        raise ValueError(f"unknown algorithm in {raw!r}; choose from {valid}") from None


def build_run_config(config: RaimsimConfig) -> RunConfig:
    """Run template; its scenario supplies everything but M, noise_std and m_b."""
    settings = config.scenario
    return RunConfig(
        scenario=settings.to_scenario(
            settings.stations, settings.noise_std, [0.0] * settings.stations
        ),
        n_epochs=config.run.epochs,
        master_seed=config.run.seed,
        algorithms=tuple(config.algorithms),
        workers=config.run.workers,
        chunk_size=config.run.chunk_size,
        pixel_size=config.run.pixel_size,
        percentile=config.run.percentile,
    )


def print_summary(cells: list[CellResult]) -> None:
    table = create_table(
        "Summary",
        [
            {"name": "M", "justify": "right"},
            {"name": "σn", "justify": "right"},
            {"name": "Algorithm", "style": "cyan"},
            {"name": "IR", "justify": "right"},
            {"name": "No trust", "justify": "right"},
            {"name": "PL p99", "justify": "right"},
            {"name": "Mean PL", "justify": "right"},
        ],
    )
    for cell in cells:
        for stats in cell.result.summaries.values():
            table.add_row(
                str(cell.stations),
                f"{cell.noise_std:g}",
                str(stats.algorithm),
                f"{stats.simulated_ir:.3e}",
                f"{stats.no_trust_rate:.3e}",
                f"{stats.pl_p99:.4f}",
                f"{stats.mean_pl:.4f}",
            )
    console.print(table)


def run(
    config_path: Path = typer.Option(
        Path(CONFIG_FILENAME), "--config", "-c", help="Path to the configuration file"
    ),
    out: Path = typer.Option(..., "--out", "-o", help="Output directory"),
    seed: int | None = typer.Option(None, "--seed", help="Override run.seed"),
    epochs: int | None = typer.Option(None, "--epochs", help="Override run.epochs"),
    algs: str | None = typer.Option(
        None, "--algs", help="Comma-separated subset of bayes_fe,bayes_nfe,baseline"
    ),
) -> None:
    """Simulate every configured cell and write CSV results plus a manifest."""
    config = load_config_or_exit(config_path)

    try:
        algorithms = parse_algorithms(algs) if algs is not None else None
        config = config.with_overrides(seed=seed, epochs=epochs, algorithms=algorithms)
    except ValidationError as e:
        print_error(f"Invalid override:\n{format_validation_error(e)}")
        raise typer.Exit(EXIT_USAGE)
    except ValueError as e:
        print_error(f"Invalid --algs: {e}")
        raise typer.Exit(EXIT_USAGE)

    console.print(
        f"Running [cyan]{len(config.cells())}[/cyan] cell(s) of "
        f"[cyan]{config.run.epochs}[/cyan] epochs, seed [cyan]{config.run.seed}[/cyan]"
    )

    reporter = CellProgressReporter()
    try:
        cells = run_sweep(
            build_run_config(config),
            config.cells(),
            half_width=config.scenario.bias_mean_half_width,
            bias_means=config.scenario.bias_means,
            on_cell=reporter,
            on_epochs=reporter.epochs,
        )

        writer = ReportWriter(out)
        writer.prepare()
        cell_manifests = [
            CellManifest(
                stations=cell.stations,
                noise_std=cell.noise_std,
                cell_seed=cell.cell_seed,
                bias_means=list(cell.bias_means),
                files=writer.write_cell(cell, write_records=config.run.write_records),
            )
            for cell in cells
        ]
        summary = writer.write_summary(cells)
        ManifestManager(out).save(
            RunManifest(
                config_path=str(config_path),
                output_dir=str(out),
                master_seed=config.run.seed,
                config=config.to_yaml_dict(),
                cells=cell_manifests,
                files=[summary],
            )
        )
    except RaimsimError as e:
        print_error(str(e))
        raise typer.Exit(EXIT_RUNTIME)

    print_summary(cells)
    print_success(f"Results written to {out} ({SUMMARY_FILENAME}, manifest.json)")
    for cell in cells:
        for stats in cell.result.summaries.values():
            if stats.pl_count == 0:
                console.print(
                    f"[yellow]{stats.algorithm} produced no PL at "
                    f"M={cell.stations}, σn={format_float(cell.noise_std)}[/yellow]"
                )
