"""Parse, lint, hierarchy-check and simulate generated Verilog, and drive a
generate/check/feedback loop around a code-generation backend."""

__version__ = "0.1.0"
