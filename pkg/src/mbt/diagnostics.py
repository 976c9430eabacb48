"""Diagnostics shared by the parsers, checkers and linters."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple


class Span(NamedTuple):
    line: int = 0
    column: int = 0
    length: int = 0


NO_SPAN = Span()


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    span: Span
    message: str
    code: str

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def format(self, path: str = "<input>") -> str:
        return f"{path}:{self.span.line}:{self.span.column}: {self.severity}[{self.code}]: {self.message}"


def error(span: Span, code: str, message: str) -> Diagnostic:
    return Diagnostic("error", span, message, code)


def warning(span: Span, code: str, message: str) -> Diagnostic:
    return Diagnostic("warning", span, message, code)


def sort_by_position(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    return sorted(diags, key=lambda d: (d.span.line, d.span.column, d.code, d.message))


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diags)


class DslError(Exception):
    """Raised by the parsers when a unit cannot be turned into its domain type."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = sort_by_position(diagnostics)
        first = self.diagnostics[0] if self.diagnostics else None
        super().__init__(first.format() if first else "parse failed")
