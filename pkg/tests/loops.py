"""Scripted feedback-loop sessions shared by several test files."""

import json
from pathlib import Path

from rtlloop.hierarchy import load_manifest
from rtlloop.orchestrator import BackendSpec, GoldenCheck, SessionConfig
from rtlloop.pwm import corpus_sources
from rtlloop.pwm.corpus import manifest_bytes

LISTING_MANIFEST = {
    "top": "listing1",
    "clock": {"name": "clk"},
    "modules": [{"name": "listing1",
                 "description": "Registered-free pass-through of a 2-bit value.",
                 "ports": [{"name": "in", "dir": "input", "width": 2},
                           {"name": "out", "dir": "output", "width": 2}]}],
}

BROKEN = """Here is the module.
```verilog
module listing1(input [1:0] in, output reg [1:0] out);
always @(*)begin
  out = in;
}
endmodule
```
"""

FIXED = """Corrected:
```verilog
module listing1(input [1:0] in, output reg [1:0] out);
always @(*) begin
  out = in;
end
endmodule
```
"""


def fenced(text):
    return f"```verilog\n{text}```\n"


def write_config(tmp: Path, responses, max_iterations=5, manifest=None, golden=None) -> Path:
    """Write a mock-backed session config under ``tmp``; returns its path."""
    tmp.mkdir(parents=True, exist_ok=True)
    (tmp / "manifest.json").write_text(json.dumps(manifest or LISTING_MANIFEST))
    script = []
    for k, text in enumerate(responses):
        name = f"reply{k + 1}.txt"
        (tmp / name).write_text(text)
        script.append(name)
    cfg = {"manifest": "manifest.json", "backend": {"kind": "mock", "script": script},
           "max_iterations": max_iterations, "out_dir": "out"}
    if golden:
        cfg["golden_check"] = golden
    path = tmp / "session.json"
    path.write_text(json.dumps(cfg))
    return path


def config(tmp: Path, responses, max_iterations=5) -> SessionConfig:
    (tmp / "m.json").parent.mkdir(parents=True, exist_ok=True)
    return SessionConfig(
        manifest=load_manifest(json.dumps(LISTING_MANIFEST).encode()),
        backend=BackendSpec("mock", tuple(responses)),
        out_dir=tmp / "out", max_iterations=max_iterations)


def pwm_responses():
    """One fenced reference module per manifest module, in build order."""
    manifest = load_manifest(manifest_bytes())
    by_module = {}
    for name, text in corpus_sources().items():
        by_module[name[:-2]] = text
    return [fenced(by_module[m]) for m in manifest.build_order()]


def pwm_config(tmp: Path, golden=GoldenCheck(cycles=1024)) -> SessionConfig:
    return SessionConfig(manifest=load_manifest(manifest_bytes()),
                         backend=BackendSpec("mock", tuple(pwm_responses())),
                         out_dir=tmp / "out", max_iterations=2, golden_check=golden)
