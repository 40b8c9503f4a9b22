"""Raimsim - Bayesian and solution-separation RAIM for 1D snapshot positioning."""

__version__ = "0.1.0"
