"""Exception types raised by construction and evaluation."""

from __future__ import annotations


class DagrealError(Exception):
    """Base class for all library errors."""


class DomainError(DagrealError):
    """Operation applied outside its real domain (e.g. sqrt of a negative)."""


class EvaluationError(DagrealError):
    """Adaptive evaluation could not satisfy the requested accuracy."""

    def __init__(self, message: str, node=None):
        super().__init__(message)
        self.node = node


class PrecisionOverflowError(EvaluationError):
    """A recomputation would exceed the configured precision ceiling."""


class DivisorNotSeparatedError(EvaluationError):
    """A divisor could not be bounded away from zero at any allowed precision."""


class GraphCorruptionError(DagrealError):
    """A structural invariant of the dag (acyclicity) no longer holds."""
