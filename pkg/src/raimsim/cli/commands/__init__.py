"""CLI commands."""

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
