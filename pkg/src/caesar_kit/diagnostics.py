"""Source positions and diagnostics shared by the parser, validator and importer."""

from __future__ import annotations

import enum
import os
import re
from dataclasses import dataclass

_CODE_RE = re.compile(r"[EW][0-9]{3}")


@dataclass(frozen=True, slots=True)
class SourceSpan:
    """A region of an input file.

    Lines and columns are 1-based. ``end_col`` is exclusive, so a one-character
    token at column 5 spans ``(5, 6)``.
    """

    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self) -> None:
        if (self.start_line, self.start_col) > (self.end_line, self.end_col):
            raise ValueError(f"span ends before it starts: {self!r}")

    def sort_key(self) -> tuple[str, int, int, int, int]:
        return (self.file, self.start_line, self.start_col, self.end_line, self.end_col)

    def to(self, other: SourceSpan) -> SourceSpan:
        """Span covering ``self`` through ``other``."""
        return SourceSpan(self.file, self.start_line, self.start_col, other.end_line, other.end_col)


class Severity(str, enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True, slots=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    span: SourceSpan | None = None

    def __post_init__(self) -> None:
        if not _CODE_RE.fullmatch(self.code):
            raise ValueError(f"bad diagnostic code {self.code!r}")
        expected = Severity.ERROR if self.code[0] == "E" else Severity.WARNING
        if self.severity is not expected:
            raise ValueError(f"code {self.code} does not match severity {self.severity.value}")

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def sort_key(self) -> tuple:
        span_key = self.span.sort_key() if self.span is not None else ("", 0, 0, 0, 0)
        return (span_key[0], span_key[1:], self.code)

    def render(self, color: bool = False) -> str:
        """``FILE:LINE:COL: SEVERITY CODE: MESSAGE``"""
        if self.span is None:
            where = "<unknown>:1:1"
        else:
            where = f"{self.span.file}:{self.span.start_line}:{self.span.start_col}"
        label = f"{self.severity.value} {self.code}"
        if color:
            ansi = "\x1b[1;31m" if self.is_error else "\x1b[1;33m"
            label = f"{ansi}{label}\x1b[0m"
        return f"{where}: {label}: {self.message}"


def error(code: str, message: str, span: SourceSpan | None = None) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, span)


def warning(code: str, message: str, span: SourceSpan | None = None) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, message, span)


def has_errors(diagnostics) -> bool:
    return any(d.is_error for d in diagnostics)


def sort_diagnostics(diagnostics) -> list[Diagnostic]:
    """Stable order: by file, then span, then code."""
    return sorted(diagnostics, key=Diagnostic.sort_key)


def use_color(stream) -> bool:
    if os.environ.get("CAESAR_NO_COLOR") == "1":
        return False
    isatty = getattr(stream, "isatty", None)
    return bool(isatty and isatty())
