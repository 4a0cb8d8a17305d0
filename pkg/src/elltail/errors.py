"""Semantic exception hierarchy.

Every failure raised by this package derives from ElltailError so callers
(and the CLI) can separate numeric/data failures from programming errors.
"""


class ElltailError(Exception):
    """Base class for all package errors."""


class DomainError(ElltailError, ValueError):
    """An input lies outside the mathematical domain of the operation."""


class NumericFailure(ElltailError):
    """An iterative numeric procedure failed to converge.

    Carries a ``context`` dict with whatever state is useful for debugging
    (brackets, achieved error estimates, iteration counts).
    """

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.context = context

    def __str__(self) -> str:
        base = super().__str__()
        if self.context:
            details = ", ".join(f"{k}={v!r}" for k, v in sorted(self.context.items()))
            return f"{base} ({details})"
        return base


class UnsupportedFamilyError(ElltailError):
    """The radial family does not support the requested operation."""


class DegenerateCorrelationError(ElltailError):
    """Estimated correlation is numerically +-1; downstream formulas divide by sqrt(1-rho^2)."""


class DegenerateTailError(ElltailError):
    """Top order statistics carry no information (all equal, or not strictly positive)."""


class InvalidThresholdError(ElltailError):
    """Order-statistic threshold k_n violates k_n < n/e."""


class InsufficientDataError(ElltailError):
    """Too few observations for the requested procedure."""


class ConfigError(ElltailError):
    """A configuration file is missing keys or holds values of the wrong shape."""
