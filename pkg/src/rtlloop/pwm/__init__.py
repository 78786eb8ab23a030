"""Golden model of the three-phase PWM generator and its reference design."""

from .compare import CompareReport, Mismatch, TraceShapeError, compare_traces
from .corpus import CORPUS_FILES, SIGNAL_MAP, TOP, corpus_sources, dead_time_mutant, manifest_bytes
from .golden import (GOLDEN_WIDTHS, SWEEP, PwmConfig, PwmInputs, PwmOutputs, PwmState,
                     pwm_outputs, pwm_step, run_golden, sweep_schedule)
from .verify import DUTIES, duty_stimulus, verify_design

__all__ = ["CORPUS_FILES", "CompareReport", "DUTIES", "GOLDEN_WIDTHS", "Mismatch", "PwmConfig",
           "PwmInputs", "PwmOutputs", "PwmState", "SIGNAL_MAP", "SWEEP", "TOP",
           "TraceShapeError", "compare_traces", "corpus_sources", "dead_time_mutant",
           "duty_stimulus", "manifest_bytes", "pwm_outputs", "pwm_step", "run_golden",
           "sweep_schedule", "verify_design"]
