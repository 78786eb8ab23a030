"""Per-cycle signal traces and their CSV form."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field


@dataclass
class Trace:
    cycles: int
    signals: dict = field(default_factory=dict)   # name -> list[int]
    widths: dict = field(default_factory=dict)    # name -> int

    def __post_init__(self):
        for name, values in self.signals.items():
            if len(values) != self.cycles:
                raise ValueError(f"signal {name} has {len(values)} samples, expected {self.cycles}")
            w = self.widths.get(name)
            if w is None:
                raise ValueError(f"signal {name} has no width")
            limit = 1 << w
            if any(v < 0 or v >= limit for v in values):
                raise ValueError(f"signal {name} holds a value outside [0, 2^{w})")

    def __getitem__(self, name: str) -> list:
        return self.signals[name]

    def bit(self, name: str, k: int) -> list:
        return [(v >> k) & 1 for v in self.signals[name]]

    def select(self, names) -> "Trace":
        return Trace(self.cycles, {n: self.signals[n] for n in names},
                     {n: self.widths[n] for n in names})

    def to_csv(self) -> str:
        names = list(self.signals)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cycle"] + names)
        for t in range(self.cycles):
            w.writerow([t] + [self.signals[n][t] for n in names])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, widths: dict) -> "Trace":
        rows = list(csv.reader(io.StringIO(text)))
        names = rows[0][1:]
        signals = {n: [int(r[i + 1]) for r in rows[1:]] for i, n in enumerate(names)}
        return cls(len(rows) - 1, signals, {n: widths[n] for n in names})
