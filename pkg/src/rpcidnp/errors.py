"""
Exception types raised by rpcidnp.

The CLI maps these to exit codes; library callers can catch the base class.
"""

from typing import Optional


class RpcidnpError(Exception):
    """Base class for all rpcidnp errors."""


class ConfigurationError(RpcidnpError, ValueError):
    """Invalid system description, layout mismatch or step-size policy violation."""


class UnsupportedConfigurationError(ConfigurationError):
    """A valid configuration that a particular solver does not handle."""


class UsageError(RpcidnpError, ValueError):
    """Bad arguments to an operation (zero rate, empty series, unknown key)."""


class ObservableRangeError(RpcidnpError, ValueError):
    """A derived observable cannot be extracted from the given data."""


class NumericalIntegrityError(RpcidnpError, ArithmeticError):
    """A numerical invariant was violated beyond tolerance."""

    def __init__(self, message: str, time: Optional[float] = None):
        super().__init__(message)
        self.time = time


class ScenarioParseError(ConfigurationError):
    """A scenario file could not be parsed or validated."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        self.reason = message
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
