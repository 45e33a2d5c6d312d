"""Exception hierarchy shared by all qev modules."""


class QevError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(QevError):
    """An input value lies outside the mathematical domain of an operation."""


class ConfigError(QevError):
    """A structurally invalid configuration (bad order, grid spec, flags)."""


class NumericError(QevError):
    """A numerical procedure failed (non-convergence, breakdown, underflow)."""
