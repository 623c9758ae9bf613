"""Exception hierarchy shared by all fullcorr modules."""

from __future__ import annotations


class FullCorrError(Exception):
    """Base class for every error raised by fullcorr."""


class ValidationError(FullCorrError, ValueError):
    """Invalid arguments, dimensions or input documents."""


class InvalidScenarioError(ValidationError):
    pass


class DimensionMismatchError(ValidationError):
    pass


class IndexOutOfRangeError(ValidationError, IndexError):
    pass


class PreconditionError(ValidationError):
    """An operation was called outside the family of expressions it supports."""


class SchemaError(ValidationError):
    pass


class NormalizationError(ValidationError):
    pass


class ReductionMismatchError(ValidationError):
    pass


class GuardExceededError(FullCorrError):
    """Raised before any work is done when a computation would exceed its size guard.

    ``cost`` is the estimated size and ``guard`` the configured limit.
    """

    def __init__(self, what: str, cost: int, guard: int) -> None:
        self.what = what
        self.cost = cost
        self.guard = guard
        super().__init__(f"{what}: estimated cost {cost} exceeds guard {guard}")


class VerificationError(FullCorrError):
    """A numerical self-check failed (e.g. closed form vs numerical spectrum)."""
