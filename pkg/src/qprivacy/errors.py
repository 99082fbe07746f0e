class QPrivacyError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(QPrivacyError, ValueError):
    """An object violates one of its invariants (hermiticity, trace, ...)."""


class DimensionError(QPrivacyError, ValueError):
    """Shapes or subsystem signatures do not match."""


class DimensionLimitError(DimensionError):
    """A construction would exceed the configured maximum side length."""


class UnsupportedDimensionError(DimensionError):
    """The requested quantity is only implemented for specific dimensions."""


class NumericError(QPrivacyError, ArithmeticError):
    """A numerical routine failed; ``residual`` carries the offending norm."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InfeasibleError(QPrivacyError, ValueError):
    pass


class ConfigError(QPrivacyError, ValueError):
    pass


class ParseError(QPrivacyError, ValueError):
    """Malformed scenario/state/channel literal; message names the field."""
