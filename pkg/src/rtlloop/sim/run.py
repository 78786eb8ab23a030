"""Two-state cycle simulation of an elaborated design."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .elaborate import ElaboratedDesign
from .trace import Trace

MAX_SWEEPS = 1000


class SimulationError(RuntimeError):
    pass


class StimulusError(ValueError):
    """The stimulus does not fit the design or is malformed."""


@dataclass(frozen=True)
class Write:
    signal: str
    cycle: int
    value: int


@dataclass(frozen=True)
class Stimulus:
    reset_cycles: int = 4
    writes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.reset_cycles < 1:
            raise StimulusError("reset_cycles must be at least 1")
        for w in self.writes:
            if w.cycle < 0 or w.value < 0:
                raise StimulusError(f"write to {w.signal}: cycle and value must be non-negative")

    @classmethod
    def from_json(cls, obj: dict) -> "Stimulus":
        try:
            writes = tuple(Write(str(w["signal"]), int(w["cycle"]), int(w["value"]))
                           for w in obj.get("writes", []))
            return cls(int(obj.get("reset_cycles", 4)), writes)
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            if isinstance(e, StimulusError):
                raise
            raise StimulusError(f"malformed stimulus: {e}") from e

    @classmethod
    def load(cls, data: bytes) -> "Stimulus":
        try:
            obj = json.loads(data)
        except json.JSONDecodeError as e:
            raise StimulusError(f"stimulus is not valid JSON: line {e.lineno} column {e.colno}: "
                                f"{e.msg}") from e
        if not isinstance(obj, dict):
            raise StimulusError("stimulus must be a JSON object")
        return cls.from_json(obj)

    def as_json(self) -> dict:
        return {"reset_cycles": self.reset_cycles,
                "writes": [w.__dict__ for w in self.writes]}

    def check(self, design: ElaboratedDesign):
        for w in self.writes:
            if w.signal not in design.inputs:
                raise StimulusError(f"{w.signal} is not an input of {design.top}")
            if w.signal == design.clock:
                raise StimulusError(f"{w.signal} is the clock and is driven by the simulator")
            width = design.signals[w.signal].width
            if w.value >= 1 << width:
                raise StimulusError(f"value {w.value} does not fit {w.signal} ({width} bits)")


def _settle(design: ElaboratedDesign, v: list):
    fn = design.settle_fn
    for _ in range(MAX_SWEEPS):
        before = v[:]
        fn(v)
        if v == before:
            return
    raise SimulationError("combinational instability")


def run(design: ElaboratedDesign, stimulus: Stimulus = Stimulus(), cycles: int = 1,
        record: Optional[Iterable[str]] = None) -> Trace:
    """Simulate ``cycles`` rising clock edges; sample after each edge settles.

    ``record`` defaults to the top-level ports.
    """
    if cycles < 1:
        raise ValueError("cycles must be at least 1")
    stimulus.check(design)
    names = list(record) if record is not None else list(design.inputs + design.outputs)
    missing = [n for n in names if n not in design.signals]
    if missing:
        raise StimulusError(f"cannot record unknown signal {missing[0]}")
    slots = [design.signals[n].slot for n in names]

    writes: dict[int, list] = {}
    for w in stimulus.writes:
        writes.setdefault(w.cycle, []).append((design.signals[w.signal].slot, w.value))
    rst = design.signals[design.reset].slot if design.reset else None
    active, inactive = (0, 1) if design.reset_active_low else (1, 0)
    edge = design.edge_fn

    v = list(design.init)
    samples = [[] for _ in names]
    for t in range(cycles):
        for slot, value in writes.get(t, ()):
            v[slot] = value
        if rst is not None:
            v[rst] = active if t < stimulus.reset_cycles else inactive
        _settle(design, v)
        n: dict = {}
        edge(v, n)
        for slot, value in n.items():
            v[slot] = value
        _settle(design, v)
        for col, slot in zip(samples, slots):
            col.append(v[slot])
    return Trace(cycles, dict(zip(names, samples)),
                 {n: design.signals[n].width for n in names})
