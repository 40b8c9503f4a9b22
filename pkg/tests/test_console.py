"""Tests for console utilities."""

import logging

import pytest
from rich.logging import RichHandler

from raimsim.utils.console import (
    CellProgressReporter,
    configure_logging,
    create_table,
    print_config_panel,
    print_error,
    print_info,
    print_success,
    print_warning,
)


class TestPrintFunctions:
    """Tests for print helper functions."""

    def test_print_error(self, capsys):
        """Test print_error outputs to stderr."""
        print_error("test error message")
        captured = capsys.readouterr()
        assert "Error:" in captured.err
        assert "test error message" in captured.err

    def test_print_success(self, capsys):
        """Test print_success outputs success message."""
        print_success("test success")
        captured = capsys.readouterr()
        assert "test success" in captured.out

    def test_print_warning(self, capsys):
        """Test print_warning outputs warning message."""
        print_warning("test warning")
        captured = capsys.readouterr()
        assert "Warning:" in captured.out
        assert "test warning" in captured.out

    def test_print_info(self, capsys):
        """Test print_info outputs info message."""
        print_info("test info")
        captured = capsys.readouterr()
        assert "test info" in captured.out

    def test_print_config_panel(self, capsys):
        """Test that the config panel renders keys and the title."""
        print_config_panel({"scenario": {"stations": 5}}, title="raimsim.yaml")
        captured = capsys.readouterr()
        assert "stations" in captured.out
        assert "raimsim.yaml" in captured.out


class TestCellProgressReporter:
    """Tests for CellProgressReporter."""

    @pytest.mark.parametrize(
        "status,label", [("completed", "OK"), ("failed", "FAILED")]
    )
    def test_final_status(self, capsys, status, label):
        """Test one status line per finished cell."""
        reporter = CellProgressReporter()
        reporter("M=5, sigma_n=1", "starting")
        reporter("M=5, sigma_n=1", status)
        captured = capsys.readouterr()
        assert label in captured.out
        assert "M=5, sigma_n=1" in captured.out

    def test_epochs_without_spinner(self, capsys):
        """Test that epoch progress before any cell starts is ignored."""
        CellProgressReporter().epochs(10, 100)
        assert capsys.readouterr().out == ""

    def test_unknown_status(self):
        """Test that an unknown status is rejected."""
        with pytest.raises(ValueError, match="rolling_back"):
            CellProgressReporter()("M=5, sigma_n=1", "rolling_back")


class TestConfigureLogging:
    """Tests for configure_logging."""

    def test_levels(self):
        """Test verbose and quiet root levels with a rich handler."""
        configure_logging(verbose=True)
        root = logging.getLogger()
        assert root.level == logging.DEBUG
        assert any(isinstance(h, RichHandler) for h in root.handlers)

        configure_logging(verbose=False)
        assert logging.getLogger().level == logging.WARNING


class TestCreateTable:
    """Tests for create_table function."""

    def test_create_table_with_columns(self):
        """Test creating a table with columns."""
        table = create_table("Test Table", ["Col1", "Col2", "Col3"])

        assert table.title == "Test Table"
        assert len(table.columns) == 3

    def test_create_table_with_column_dicts(self):
        """Test column configuration from dicts."""
        table = create_table("Summary", [{"name": "IR", "justify": "right"}, "Algorithm"])

        assert table.columns[0].justify == "right"
        assert table.columns[1].header == "Algorithm"

    def test_create_table_can_add_rows(self):
        """Test that rows can be added to the table."""
        table = create_table("Test", ["A", "B"])
        table.add_row("val1", "val2")

        assert table.row_count == 1
