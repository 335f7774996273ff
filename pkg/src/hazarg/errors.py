"""Exception hierarchy shared by every hazarg module.

Every error carries a machine-readable ``code`` (kebab-case) so that callers
and tests can tell failure causes apart without string matching, plus an
optional source location for input-format errors.
"""

from __future__ import annotations


class HazargError(Exception):
    def __init__(
        self,
        code: str,
        message: str,
        *,
        source: str | None = None,
        line: int | None = None,
        column: int | None = None,
    ) -> None:
        self.code = code
        self.message = message
        self.source = source
        self.line = line
        self.column = column
        super().__init__(self.location_prefix() + message)

    def location_prefix(self) -> str:
        parts = [p for p in (self.source, self.line, self.column) if p is not None]
        if not parts:
            return ""
        return ":".join(str(p) for p in parts) + ": "


class GsnError(HazargError):
    """Rejected graph construction step."""


class ParseError(HazargError):
    """Malformed or inconsistent input document."""


class PatternError(HazargError):
    """Bad refinement or instantiation request."""


class BuildError(HazargError):
    """Inputs cannot be assembled into a safety case."""
