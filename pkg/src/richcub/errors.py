"""Shared exception types."""

from __future__ import annotations


class RichcubError(Exception):
    """Base class for all package errors."""


class ExprSyntaxError(RichcubError):
    """Malformed expression source. `offset` is a byte offset into the source."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class DomainEvalError(RichcubError):
    """An expression produced a non-finite value at the point (x, t)."""

    def __init__(self, message: str, x, t):
        super().__init__(f"{message} at x={x!r}, t={t!r}")
        self.x = x
        self.t = t


class NonFiniteError(RichcubError):
    """A numeric accumulation produced a non-finite value."""


class FileFormatError(RichcubError):
    """Malformed problem file."""
