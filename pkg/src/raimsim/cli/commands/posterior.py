"""Posterior command: inspect the exact x posterior for one measurement vector."""

from pathlib import Path

import typer

from raimsim.cli.commands import EXIT_RUNTIME, EXIT_USAGE
from raimsim.cli.commands.config import load_config_or_exit
from raimsim.config.loader import CONFIG_FILENAME
from raimsim.core.bayes import NO_EXCLUSION_THRESHOLD, run_bayes, run_message_passing
from raimsim.core.montecarlo import derive_cell_seed, draw_bias_means
from raimsim.core.reports import format_float
from raimsim.exceptions import AllMeasurementsExcludedError, RaimsimError
from raimsim.models.records import Algorithm
from raimsim.utils.console import (
    console,
    create_table,
    print_error,
    print_info,
    print_warning,
)


def parse_measurements(raw: str) -> list[float]:
    """Comma-separated floats, e.g. ``0.3,-1.2,48``."""
    return [float(value) for value in raw.split(",") if value.strip()]


def posterior(
    y: str = typer.Option(..., "--y", help="Comma-separated measurements y_1,...,y_M"),
    config_path: Path = typer.Option(
        Path(CONFIG_FILENAME), "--config", "-c", help="Path to the configuration file"
    ),
    stations: int | None = typer.Option(None, "--stations", min=1, help="M (default: scenario)"),
    noise_std: float | None = typer.Option(
        None, "--noise-std", help="Noise std in meters (default: scenario)"
    ),
) -> None:
    """Print posterior components, theta', estimate and PL for both Bayes variants."""
    config = load_config_or_exit(config_path)
    settings = config.scenario
    stations = settings.stations if stations is None else stations
    noise_std = settings.noise_std if noise_std is None else noise_std
    if not noise_std > 0.0:
        print_error(f"--noise-std must be positive, got {noise_std}")
        raise typer.Exit(EXIT_USAGE)

    try:
        values = parse_measurements(y)
    except ValueError:
        print_error(f"--y must be comma-separated numbers, got {y!r}")
        raise typer.Exit(EXIT_USAGE)
    if len(values) != stations:
        print_error(f"Expected {stations} measurements, got {len(values)}")
        raise typer.Exit(EXIT_USAGE)

    if settings.bias_means is not None:
        if len(settings.bias_means) != stations:
            print_error(f"scenario.bias_means has {len(settings.bias_means)} entries, need {stations}")
            raise typer.Exit(EXIT_USAGE)
        bias_means = settings.bias_means
    else:
        cell_seed = derive_cell_seed(config.run.seed, stations, noise_std)
        bias_means = draw_bias_means(cell_seed, stations, settings.bias_mean_half_width)
        print_info(f"m_b drawn from cell seed {cell_seed}")

    try:
        scenario = settings.to_scenario(stations, noise_std, bias_means)
        messages = run_message_passing(scenario, values)
    except RaimsimError as e:
        print_error(str(e))
        raise typer.Exit(EXIT_RUNTIME)

    console.print(f"m_b: {', '.join(format_float(m) for m in scenario.bias_means)}")
    console.print(f"theta': {', '.join(format_float(t) for t in messages.theta_post)}")

    variants = [
        (Algorithm.BAYES_NFE, NO_EXCLUSION_THRESHOLD),
        (Algorithm.BAYES_FE, scenario.theta_threshold),
    ]
    for algorithm, threshold in variants:
        try:
            result = run_bayes(scenario, values, theta_threshold=threshold, messages=messages)
        except AllMeasurementsExcludedError as e:
            print_warning(f"{algorithm}: {e}; estimate not trusted")
            continue
        except RaimsimError as e:
            print_error(str(e))
            raise typer.Exit(EXIT_RUNTIME)

        table = create_table(
            f"{algorithm} posterior ({len(result.posterior)} components)",
            [
                {"name": "weight", "justify": "right"},
                {"name": "mean", "justify": "right"},
                {"name": "std", "justify": "right"},
            ],
        )
        for component in result.posterior.components:
            table.add_row(
                format_float(component.weight),
                format_float(component.mean),
                format_float(component.variance**0.5),
            )
        console.print(table)
        excluded = ", ".join(str(i) for i in result.excluded) or "none"
        console.print(f"{algorithm} excluded: {excluded}")
        console.print(f"{algorithm} x_hat: {format_float(result.estimate)}")
        console.print(f"{algorithm} PL: {format_float(result.pl)}")
