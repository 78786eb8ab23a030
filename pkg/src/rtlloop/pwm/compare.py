"""Cycle-by-cycle comparison of two traces."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from ..diagnostics import Span, make
from ..sim.trace import Trace


class TraceShapeError(ValueError):
    """Traces cannot be compared: lengths or widths differ, or a signal is missing."""


@dataclass(frozen=True)
class Mismatch:
    signal: str
    cycle: int
    expected: int
    actual: int
    count: int          # mismatching cycles for this signal


@dataclass
class CompareReport:
    mismatches: list = field(default_factory=list)
    total: int = 0

    def __bool__(self):
        # truthy when there is something to report
        return bool(self.mismatches)

    @property
    def empty(self) -> bool:
        return not self.mismatches

    def as_json(self) -> dict:
        return {"total": self.total,
                "mismatches": [m.__dict__ for m in self.mismatches]}

    def to_diagnostics(self, file: str = "<simulation>") -> list:
        span = Span(file, 0, 0, 1, 1, 1, 1)
        return [make("SIM001", span,
                     f"{m.signal} differs from the golden model at cycle {m.cycle}: "
                     f"expected {m.expected}, got {m.actual} ({m.count} mismatching cycles)",
                     hint="compare the behavior of this signal against the design description")
                for m in self.mismatches]


def compare_traces(expected: Trace, actual: Trace, signal_map: Mapping[str, str] = None,
                   bit_level: bool = False) -> CompareReport:
    """Compare mapped signals (expected name -> actual name).

    With ``bit_level`` each bit of a vector is reported as its own signal
    ``name[k]``.
    """
    if signal_map is None:
        signal_map = {n: n for n in expected.signals}
    if expected.cycles != actual.cycles:
        raise TraceShapeError(f"trace lengths differ: {expected.cycles} vs {actual.cycles}")
    report = CompareReport()
    for exp_name, act_name in signal_map.items():
        if exp_name not in expected.signals or act_name not in actual.signals:
            missing = exp_name if exp_name not in expected.signals else act_name
            raise TraceShapeError(f"signal {missing} is missing")
        w = expected.widths[exp_name]
        if actual.widths[act_name] != w:
            raise TraceShapeError(f"width of {exp_name} ({w}) differs from {act_name} "
                                  f"({actual.widths[act_name]})")
        a, b = expected.signals[exp_name], actual.signals[act_name]
        if bit_level and w > 1:
            lanes = [(f"{exp_name}[{k}]", [(v >> k) & 1 for v in a], [(v >> k) & 1 for v in b])
                     for k in range(w)]
        else:
            lanes = [(exp_name, a, b)]
        for label, xs, ys in lanes:
            bad = [t for t, (x, y) in enumerate(zip(xs, ys)) if x != y]
            if bad:
                t = bad[0]
                report.mismatches.append(Mismatch(label, t, xs[t], ys[t], len(bad)))
                report.total += len(bad)
    return report
