"""Exception hierarchy shared by every normlab module."""

from __future__ import annotations


class NormLabError(Exception):
    """Base class for all library errors."""


class DomainError(NormLabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RangeError(NormLabError, OverflowError):
    """A result is not representable as a finite double."""


class DivergenceSuspected(NormLabError, ArithmeticError):
    """Quadrature refinement failed to contract or the integrand does not decay."""


class EvaluationError(NormLabError, ArithmeticError):
    """A kernel profile produced NaN or a negative value."""


class UsageError(NormLabError, ValueError):
    """Caller supplied inconsistent arguments (dimension mismatch, bad config)."""


class ParseError(NormLabError, ValueError):
    """Syntax or semantic error in a profile expression.

    ``position`` is the 0-based character offset where the problem was detected.
    """

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
