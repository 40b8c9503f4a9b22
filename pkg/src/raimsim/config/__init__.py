"""Configuration module."""

from raimsim.config.loader import ConfigLoader, load_config
from raimsim.config.schema import RaimsimConfig

__all__ = ["ConfigLoader", "RaimsimConfig", "load_config"]
