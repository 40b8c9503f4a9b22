"""Entry point for python -m raimsim."""

from raimsim.cli.app import app

if __name__ == "__main__":
    app()
