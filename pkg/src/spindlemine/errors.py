"""Exception hierarchy shared by every spindlemine module.

The CLI maps these onto process exit codes: :class:`InputError` (and any
:class:`StageError` wrapping one) exits with 2, :class:`CapacityError`
with 3.
"""

from __future__ import annotations


class SpindlemineError(Exception):
    """Base class for all errors raised by this package."""


class InputError(SpindlemineError):
    """Invalid input data, arguments, or configuration."""


class CapacityError(SpindlemineError):
    """A configured resource limit was exceeded (e.g. the concept cap)."""


class StageError(SpindlemineError):
    """A pipeline stage failed; carries the stage name and the root cause."""

    def __init__(self, stage: str, message: str, cause: Exception | None = None):
        super().__init__(f"stage '{stage}': {message}")
        self.stage = stage
        self.cause = cause
