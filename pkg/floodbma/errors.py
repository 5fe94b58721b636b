# floodbma/errors.py
"""
floodbma.errors
===============

Exception hierarchy shared by the library and the CLI.  Every error carries
the process exit code the CLI should use when it escapes a command:

    ConfigError   → 2
    DataError     → 3
    NumericError  → 4
"""

from __future__ import annotations

from pathlib import Path


class FloodBmaError(Exception):
    """Base class; ``exit_code`` is what `floodbma` exits with."""

    exit_code: int = 1


class ConfigError(FloodBmaError):
    exit_code = 2


class DataError(FloodBmaError):
    """Bad input data.  Optionally pinned to a file and 1-based line number."""

    exit_code = 3

    def __init__(self, message: str, *, path: str | Path | None = None, line: int | None = None):
        self.path = Path(path) if path is not None else None
        self.line = line
        if self.path is not None:
            where = self.path.name if line is None else f"{self.path.name}:{line}"
            message = f"{where}: {message}"
        super().__init__(message)


class NumericError(FloodBmaError):
    exit_code = 4


class DomainError(NumericError, ValueError):
    """Argument outside the mathematical domain (non-finite, p ∉ (0,1), κ ≤ 0)."""


class SupportError(DomainError):
    """Observation outside the GEV support where a finite value is required."""
