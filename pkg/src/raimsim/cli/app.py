"""Main Typer application."""

import typer

from raimsim.cli.commands import config, posterior, run
from raimsim.utils.console import configure_logging

app = typer.Typer(
    name="raimsim",
    help="Bayesian and solution-separation RAIM simulator.",
    no_args_is_help=True,
)

app.add_typer(config.app, name="config")
app.command(name="run")(run.run)
app.command(name="posterior")(posterior.posterior)


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable debug logging"),
) -> None:
    """Raimsim - integrity monitoring for range-based positioning."""
    configure_logging(verbose)


if __name__ == "__main__":
    app()
