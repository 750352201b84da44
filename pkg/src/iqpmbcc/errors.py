"""Exception hierarchy shared by every module."""

from __future__ import annotations


class IqpError(Exception):
    """Base class for all package errors."""


class ParseError(IqpError, ValueError):
    """Malformed text input; carries the source name and 1-based line number."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.message = message
        self.line = line
        self.source = source
        super().__init__(str(self))

    def __str__(self) -> str:
        where = self.source or "<text>"
        if self.line is not None:
            where = f"{where}:{self.line}"
        return f"{where}: {self.message}"


class SizeLimitError(IqpError):
    """Requested register is larger than the engine (or oracle) supports."""


class DimensionError(IqpError, ValueError):
    """Lengths or shapes of two operands disagree."""


class ZeroProbabilityEvent(IqpError):
    """Conditioning on an event that never occurs."""


class PostselectionFailed(IqpError):
    """Repetition-based post-selection ran out of tries."""

    def __init__(self, message: str, tries: int):
        self.tries = tries
        super().__init__(message)
