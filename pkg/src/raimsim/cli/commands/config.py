"""Config commands: init, show."""

from pathlib import Path

import typer

from raimsim.cli.commands import EXIT_RUNTIME, EXIT_USAGE
from raimsim.config.loader import CONFIG_FILENAME, ConfigLoader
from raimsim.config.schema import DEFAULT_CONFIG, RaimsimConfig
from raimsim.exceptions import ConfigError, ConfigNotFoundError
from raimsim.utils.console import console, print_config_panel, print_error, print_success

app = typer.Typer(help="Configuration management.")


def load_config_or_exit(config_path: Path) -> RaimsimConfig:
    """Load the config, exiting with the usage code on any config problem."""
    try:
        return ConfigLoader(config_path).load()
    except ConfigNotFoundError:
        print_error(f"Config file not found: {config_path}")
        print_error("Run 'raimsim config init' to create one.")
        raise typer.Exit(EXIT_USAGE)
    except ConfigError as e:
        print_error(str(e))
        raise typer.Exit(EXIT_USAGE)


@app.command()
def init(
    force: bool = typer.Option(False, "--force", "-f", help="Overwrite existing config"),
) -> None:
    """Create a new raimsim.yaml configuration file."""
    loader = ConfigLoader(Path.cwd() / CONFIG_FILENAME)

    if loader.exists() and not force:
        print_error(f"Config file already exists: {loader.config_path}")
        print_error("Use --force to overwrite.")
        raise typer.Exit(EXIT_RUNTIME)

    loader.save(DEFAULT_CONFIG)
    print_success(f"Created {loader.config_path}")
    console.print("\nEdit this file to set the scenario, epoch count and sweep.")


@app.command()
def show(
    config_path: Path = typer.Option(
        Path(CONFIG_FILENAME), "--config", "-c", help="Path to the configuration file"
    ),
) -> None:
    """Show the resolved configuration, defaults included."""
    config = load_config_or_exit(config_path)
    print_config_panel(config.to_yaml_dict(), title=str(config_path))
