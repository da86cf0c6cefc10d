"""Exception types shared across the toolkit.

All data-facing errors derive from LaughkitError so the CLI can map any
of them to exit code 1 with a single handler.
"""

from __future__ import annotations


class LaughkitError(Exception):
    """Base class for all toolkit errors."""


class ParseError(LaughkitError):
    """A file could not be parsed (bad JSON, bad CSV cell, ...)."""

    def __init__(self, path, line: int | None, message: str):
        self.path = str(path)
        self.line = line
        loc = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{loc}: {message}")


class SchemaError(LaughkitError):
    """A record violates the on-disk schema (missing/invalid field)."""

    def __init__(self, path, line: int | None, field: str, message: str):
        self.path = str(path)
        self.line = line
        self.field = field
        loc = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{loc}: field '{field}': {message}")


class ValidationError(LaughkitError):
    """Data is well-formed but violates a corpus invariant."""
