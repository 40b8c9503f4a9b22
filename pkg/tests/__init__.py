"""Tests for raimsim."""
