"""Exception types shared across the package."""


class BadApproxError(Exception):
    """Base class for all package errors."""


class DimensionError(BadApproxError):
    """A dimension request is impossible (e.g. subspace dim >= ambient dim)."""


class ShapeError(BadApproxError):
    """An array argument has the wrong shape for the operation."""


class RankDeficient(BadApproxError):
    """Spanning vectors do not have full rank at the working tolerance."""


class EmptyRange(BadApproxError):
    """The requested norm range contains no nonzero integer point."""


class BudgetExceeded(BadApproxError):
    """Node budget exhausted during enumeration.

    Carries whatever partial result was completed before the budget ran out
    (a RecordTable for table builds, None otherwise).
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InsufficientData(BadApproxError):
    """Too few usable records to estimate an exponent."""


class ZeroValueSubject(BadApproxError):
    """The record table closed at value 0 (subject contains integer points)."""


class UnsupportedDegree(BadApproxError):
    """No pinned defining polynomial for the requested degree."""


class PsiNotValid(BadApproxError):
    """A claimed decay lower bound fails against the measured records."""


class DegenerateDenominator(BadApproxError):
    """The exponent bound formula divides by zero for these dimensions."""


class ConfigError(BadApproxError):
    """Malformed or inconsistent run configuration."""
