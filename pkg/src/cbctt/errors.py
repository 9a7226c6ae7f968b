"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class CttError(Exception):
    """Base class for all package errors."""


class CttFormatError(CttError, ValueError):
    """Malformed instance or solution text."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateInstanceError(CttError, ValueError):
    pass


class InfeasibleInstanceError(CttError):
    """Some course cannot receive distinct available periods for all its lectures."""


class InapplicableMoveError(CttError, ValueError):
    pass


class NeighborhoodExhaustedError(CttError):
    """Bounded resampling found no applicable move."""


class SearchSpaceTooLargeError(CttError):
    pass
