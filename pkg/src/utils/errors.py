"""Exception hierarchy.

``DataError`` covers everything caused by the data being analysed (the CLI exits
with status 1); ``UsageError`` covers invalid invocations (status 2).
"""

from typing import List, Optional, Sequence


class WronbetaError(Exception):
    """Base class for all package errors."""


class DataError(WronbetaError, ValueError):
    """Raised when input data cannot support the requested computation."""


class OutOfRange(DataError):
    """Integration bounds leave the sampling grid."""


class NotOnGrid(DataError):
    """A time does not coincide with a grid point."""


class WindowUnderflow(DataError):
    """The window [t - L, t] starts before the grid (or inside a warm-up region)."""


class EmptySeries(DataError):
    """Not enough samples for the requested operation."""


class GridMismatch(DataError):
    """Series that must share a grid do not."""


class NonPositivePrice(DataError):
    """A price is zero or negative."""

    def __init__(self, message: str, row: Optional[int] = None) -> None:
        super().__init__(message)
        self.row = row


class NotIndependent(DataError):
    """The Wronskian-like determinant is below the independence threshold."""

    def __init__(self, message: str, at: Optional[float] = None) -> None:
        super().__init__(message)
        self.at = at


class AllDegenerate(DataError):
    """Every candidate window fails the independence threshold."""


class EstimateMismatch(DataError):
    """An estimate is applied to a panel it was not computed from."""


class ZeroDenominator(DataError):
    """A ratio estimator has a vanishing denominator."""


class ZeroBeta(DataError):
    """A zero beta cannot be inverted."""


class ParseError(DataError):
    """A CSV cell cannot be parsed."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None) -> None:
        super().__init__(message)
        self.row = row
        self.column = column


class NonMonotonicDates(DataError):
    """Dates are duplicated or out of order."""

    def __init__(self, message: str, row: Optional[int] = None) -> None:
        super().__init__(message)
        self.row = row


class EmptyIntersection(DataError):
    """Aligned datasets share no date."""


class InputNotFound(DataError):
    """An input file does not exist or cannot be read."""

    def __init__(self, path: str) -> None:
        super().__init__(f"input file not found: {path}")
        self.path = path


class UsageError(WronbetaError):
    """Invalid command-line usage; carries every violated constraint."""

    def __init__(self, violations: Sequence[str]) -> None:
        self.violations: List[str] = list(violations)
        super().__init__("; ".join(self.violations))
