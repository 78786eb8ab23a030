"""Source spans and diagnostics shared by every analysis stage."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

ERROR = "error"
WARNING = "warning"

# code -> (name, default severity)
RULES = {
    "SYN000": ("SyntaxError", ERROR),
    "SYN001": ("UnresolvedReference", ERROR),
    "SYN999": ("DiagnosticFlood", ERROR),
    "PRE001": ("UndefinedMacro", WARNING),
    "PRE002": ("MacroRecursion", ERROR),
    "PRE003": ("UnsupportedDirective", WARNING),
    "LLM001": ("MismatchBeginEnd", ERROR),
    "LLM002": ("MismatchCaseEndcase", ERROR),
    "LLM003": ("MultiDrive", ERROR),
    "LLM004": ("AmbiguousClock", ERROR),
    "LLM005": ("IncompleteCombinationalAssign", WARNING),
    "LLM006": ("MissingCaseDefault", WARNING),
    "LLM007": ("NonSynthesizableConstruct", WARNING),
    "HC001": ("MissingModule", ERROR),
    "HC002": ("PortMismatch", ERROR),
    "HC003": ("InstanceMismatch", ERROR),
    "HC004": ("UndeclaredModule", WARNING),
    "HC005": ("ClockResetNonconformance", ERROR),
    "SIM001": ("SimulationMismatch", ERROR),
    "SIM002": ("FourStateValue", WARNING),
    "SIM003": ("IgnoredConstruct", WARNING),
    "GEN001": ("ExtractionFailed", ERROR),
    "GEN002": ("BackendFailure", ERROR),
}


@dataclass(frozen=True)
class Span:
    file: str
    start: int
    end: int
    line: int
    col: int
    end_line: int = 0
    end_col: int = 0

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"span start {self.start} > end {self.end}")
        if self.line < 1 or self.col < 1:
            raise ValueError("line and column are 1-based")

    def to(self, other: "Span") -> "Span":
        """Span covering self through other."""
        return Span(self.file, self.start, max(self.end, other.end), self.line,
                    self.col, other.end_line, other.end_col)

    def as_json(self) -> dict:
        return {
            "file": self.file,
            "start": {"line": self.line, "col": self.col},
            "end": {"line": self.end_line or self.line, "col": self.end_col or self.col},
        }


class SourceMap:
    """Offset to line/column lookup for one source text."""

    def __init__(self, text: str, file: str = "<input>"):
        self.text = text
        self.file = file
        self._starts = [0]
        for i, ch in enumerate(text):
            if ch == "\n":
                self._starts.append(i + 1)

    def position(self, offset: int) -> tuple[int, int]:
        lo, hi = 0, len(self._starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self._starts[mid] <= offset:
                lo = mid
            else:
                hi = mid - 1
        return lo + 1, offset - self._starts[lo] + 1

    def span(self, start: int, end: int) -> Span:
        line, col = self.position(start)
        end_line, end_col = self.position(end)
        return Span(self.file, start, end, line, col, end_line, end_col)


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    severity: str
    span: Span
    message: str
    hint: Optional[str] = None
    related: tuple = ()
    # parse recovery details: expected / found token text
    expected: Optional[str] = None
    found: Optional[str] = None

    def __post_init__(self):
        if not self.message:
            raise ValueError("diagnostic message must be non-empty")
        if self.severity not in (ERROR, WARNING):
            raise ValueError(f"bad severity {self.severity!r}")

    @property
    def is_error(self) -> bool:
        return self.severity == ERROR

    def sort_key(self):
        return (self.span.file, self.span.start, self.rule)

    def location(self) -> str:
        return f"{self.span.file}:{self.span.line}:{self.span.col}"

    def as_text(self) -> str:
        return f"{self.location()}: {self.severity}[{self.rule}] {self.message}"

    def as_json(self) -> dict:
        s = self.span.as_json()
        return {
            "rule": self.rule,
            "severity": self.severity,
            "file": s["file"],
            "start": s["start"],
            "end": s["end"],
            "message": self.message,
            "hint": self.hint,
            "related": [r.as_json() for r in self.related],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Diagnostic":
        def span_of(o):
            return Span(o["file"], 0, 0, o["start"]["line"], o["start"]["col"],
                        o["end"]["line"], o["end"]["col"])
        return cls(obj["rule"], obj["severity"], span_of(obj), obj["message"],
                   obj.get("hint"), tuple(span_of(r) for r in obj.get("related", [])))


def make(rule: str, span: Span, message: str, hint: str = None, severity: str = None,
         **kw) -> Diagnostic:
    if severity is None:
        severity = RULES[rule][1]
    return Diagnostic(rule, severity, span, message, hint, **kw)


def sort_diagnostics(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    return sorted(diags, key=Diagnostic.sort_key)


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diags)


def render_diagnostics(diags: Iterable[Diagnostic], format: str = "text") -> bytes:
    """Render diagnostics as text lines or a JSON array."""
    diags = list(diags)
    if format == "text":
        return "".join(d.as_text() + "\n" for d in diags).encode()
    if format == "json":
        return json.dumps([d.as_json() for d in diags], indent=2).encode()
    raise ValueError(f"unknown format {format!r}")
