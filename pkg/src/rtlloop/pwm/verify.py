"""Simulate a PWM design and compare it with the golden model."""

from __future__ import annotations

from ..sim import Stimulus, Write, elaborate, run
from .compare import CompareReport, TraceShapeError, compare_traces
from .corpus import SIGNAL_MAP, TOP
from .golden import PwmConfig, run_golden

DUTIES = (0, 64, 128, 192)


def duty_stimulus(duty: int, reset_cycles: int = 4) -> Stimulus:
    return Stimulus(reset_cycles, (Write("en", 0, 1), Write("duty", 0, duty)))


def verify_design(asts, duties=DUTIES, cycles: int = 2048, top: str = TOP,
                  signal_map: dict = None, reset_cycles: int = 4, clock: str = "clk",
                  reset: str = "rstn", reset_active_low: bool = True,
                  design=None) -> dict:
    """duty -> CompareReport of the design against the golden model.

    Raises ElaborationError / TraceShapeError when the design cannot be
    simulated or lacks a mapped signal.
    """
    signal_map = dict(signal_map or SIGNAL_MAP)
    if design is None:
        design = elaborate(asts, top, clock=clock, reset=reset,
                           reset_active_low=reset_active_low)
    missing = [s for s in signal_map.values() if s not in design.signals]
    if missing:
        raise TraceShapeError(f"signal {missing[0]} is missing from {top}")
    reports: dict[int, CompareReport] = {}
    for duty in duties:
        actual = run(design, duty_stimulus(duty, reset_cycles), cycles,
                     list(signal_map.values()))
        expected = run_golden(PwmConfig(), {0: duty}, reset_cycles, cycles)
        reports[duty] = compare_traces(expected, actual, signal_map)
    return reports
