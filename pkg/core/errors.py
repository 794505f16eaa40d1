"""Error hierarchy shared across shortck modules."""

from __future__ import annotations


class ShortCkError(RuntimeError):
    """Base error for domain failures (CLI exit status 1)."""


class NonFiniteInputError(ShortCkError, ValueError):
    """NaN or infinity handed to an exact embedding."""


class DimensionMismatchError(ShortCkError, ValueError):
    """Point dimension differs from the map's dimension."""


class UnsupportedOperationError(ShortCkError):
    """Operation not available for this map variant (e.g. Custom without inverse)."""


class SequenceValidationError(ShortCkError):
    """Coefficient sequence or polynomial violates the construction's constraints."""


class PreconditionError(ShortCkError, ValueError):
    """Caller broke a documented precondition."""


class JacobianEstimationError(ShortCkError):
    """Finite-difference Jacobian came out degenerate or non-finite."""


class ConfigError(ShortCkError):
    """Run-config problem (CLI exit status 2). Carries line number and key."""

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line = line
        self.key = key
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
