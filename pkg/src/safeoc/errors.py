"""Exception types raised across the package."""


class SafeOCError(Exception):
    """Base class for all package errors."""


class InvalidInputError(SafeOCError, ValueError):
    """An argument is malformed (bad distribution, wrong dimensionality, ...)."""


class ContractViolation(SafeOCError, RuntimeError):
    """An operation was called in a state its contract forbids."""


class NumericError(SafeOCError, ArithmeticError):
    """A computation produced or received non-finite values."""


class ConfigError(SafeOCError, ValueError):
    """Experiment configuration is missing, malformed, or out of range."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
