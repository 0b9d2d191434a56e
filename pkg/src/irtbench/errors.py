"""Exception types shared across the package."""

from __future__ import annotations


class IrtBenchError(Exception):
    """Base class for all package errors."""


class DomainError(IrtBenchError):
    """A numeric argument is outside its documented domain."""


class ShapeError(IrtBenchError):
    """Array-like arguments have inconsistent lengths or shapes."""


class EmptyInput(IrtBenchError):
    """An operation that requires data received none."""


class MalformedCell(IrtBenchError):
    """A response cell is not binary (or otherwise unparseable).

    Carries the zero-based respondent row and item column of the offending
    cell so callers can point at the exact location in the source.
    """

    def __init__(self, row: int, col: int, value: object = None):
        self.row = row
        self.col = col
        self.value = value
        detail = f" (value {value!r})" if value is not None else ""
        super().__init__(f"malformed cell at row {row}, column {col}{detail}")


class DuplicateRespondent(IrtBenchError):
    """Two rows of a response matrix share the same respondent name."""


class NotFound(IrtBenchError):
    """A referenced dataset, respondent, or classifier does not exist."""


class TieError(IrtBenchError):
    """A tie cannot be resolved without an explicit tie-break policy."""


class TooManyItems(IrtBenchError):
    """A response matrix exceeds the supported item count for joint fits."""


class TooFewPlayers(IrtBenchError):
    """A round-robin needs at least two participants."""


class ConvergenceError(IrtBenchError):
    """An iterative solver exceeded its step budget."""
