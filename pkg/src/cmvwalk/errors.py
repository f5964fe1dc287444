"""Exception types shared across the package."""

from __future__ import annotations


class TruncationOverflowError(RuntimeError):
    """A state's light cone would leave the retained window; regrow and retry."""


class ResourceLimitError(RuntimeError):
    """A computation would exceed its memory budget.

    Carries ``feasible_t_max``, the largest horizon that fits the budget.
    """

    def __init__(self, message: str, feasible_t_max: int):
        super().__init__(message)
        self.feasible_t_max = feasible_t_max


class PreconditionError(ValueError):
    """An input violates a documented precondition.

    ``required_t_max`` is set when the fix is a longer evolution record.
    """

    def __init__(self, message: str, required_t_max: int | None = None):
        super().__init__(message)
        self.required_t_max = required_t_max


class SchemaError(ValueError):
    """A model-spec document failed validation; ``field`` locates the offender."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class UnsupportedCoinError(ValueError):
    """Coins whose diagonal is not real positive need the gauge construction."""
