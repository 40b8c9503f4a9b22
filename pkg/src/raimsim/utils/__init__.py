"""Utility modules."""

from raimsim.utils.console import configure_logging, console, error_console

__all__ = ["configure_logging", "console", "error_console"]
