"""Custom exceptions for Raimsim."""


class RaimsimError(Exception):
    """Base exception for Raimsim."""


class ConfigError(RaimsimError):
    """Configuration related errors."""


class ConfigNotFoundError(ConfigError):
    """Config file not found."""


class ConfigValidationError(ConfigError):
    """Config validation failed."""


class ScenarioError(RaimsimError):
    """Invalid scenario or station parameters."""


class NumericsError(RaimsimError):
    """Mixture algebra or root bracketing errors."""


class DomainError(NumericsError, ValueError):
    """Argument outside the domain of a function."""


class MixtureNormalizationError(NumericsError):
    """Mixture weights do not form a probability distribution."""


class InvalidBracketError(NumericsError):
    """Bisection bracket is malformed."""


class ProtectionLevelUnavailableError(NumericsError):
    """No radius meets the integrity risk target within the expansion cap."""


class MessagePassingError(RaimsimError):
    """Factor graph message passing errors."""


class AllMeasurementsExcludedError(MessagePassingError):
    """Fault exclusion removed every measurement."""


class FaultModeError(RaimsimError):
    """Fault mode enumeration errors."""


class OutputError(RaimsimError):
    """Result file writing errors."""


class SimulationError(RaimsimError):
    """Monte-Carlo run configuration or execution errors."""
