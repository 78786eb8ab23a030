"""Cycle-accurate two-state simulation, traces and VCD."""

from .elaborate import ElaboratedDesign, ElaborationError, Process, SignalInfo, elaborate
from .run import MAX_SWEEPS, SimulationError, Stimulus, StimulusError, Write, run
from .trace import Trace
from .vcd import VcdError, read_vcd, write_vcd

__all__ = ["ElaboratedDesign", "ElaborationError", "MAX_SWEEPS", "Process", "SignalInfo",
           "SimulationError", "Stimulus", "StimulusError", "Trace", "VcdError", "Write",
           "elaborate", "read_vcd", "run", "write_vcd"]
