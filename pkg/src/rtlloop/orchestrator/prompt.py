"""Role-scoped generation prompts built from the design manifest."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..diagnostics import Diagnostic
from ..hierarchy import DesignManifest

DEFAULT_PREAMBLE = (
    "You are a specialist in integrated circuit (IC) design with deep experience writing "
    "synthesizable Verilog-2001 RTL. Answer with Verilog source only, inside a single "
    "```verilog fenced block."
)

# (rule code, instruction) pairs; the codes match the checks run on the answer
DEFAULT_STYLE = (
    ("LLM001", "Close every begin with end; never use braces to delimit blocks."),
    ("LLM002", "Close every case statement with endcase."),
    ("LLM003", "Drive each signal from exactly one always block or continuous assign."),
    ("LLM004", "In a clocked block with an asynchronous reset, make the body a single "
               "if/else on the reset with nothing after it."),
    ("LLM005", "In combinational always @(*) blocks, assign every output on every path."),
    ("LLM006", "Give every case statement a default arm."),
    ("LLM007", "Do not use initial blocks or # delays."),
    ("STYLE", "Use ANSI-style port declarations with exactly the ports listed below."),
)


class PromptError(ValueError):
    pass


@dataclass(frozen=True)
class RoleConfig:
    preamble: str = DEFAULT_PREAMBLE
    style: tuple = DEFAULT_STYLE

    def __post_init__(self):
        if not self.preamble or not self.preamble.strip():
            raise PromptError("role preamble must not be empty")

    @classmethod
    def from_json(cls, obj: Optional[dict]) -> "RoleConfig":
        if not obj:
            return cls()
        style = obj.get("style")
        if style is None:
            style = DEFAULT_STYLE
        else:
            style = tuple((str(s.get("rule", "STYLE")), str(s["text"])) if isinstance(s, dict)
                          else ("STYLE", str(s)) for s in style)
        return cls(obj.get("preamble", DEFAULT_PREAMBLE), tuple(style))


@dataclass(frozen=True)
class RolePrompt:
    preamble: str
    style: str
    interface: str
    conventions: str
    task: str
    feedback: Optional[str] = None

    def text(self) -> str:
        parts = [self.preamble, self.style, self.interface, self.conventions, self.task]
        if self.feedback:
            parts.append(self.feedback)
        return "\n\n".join(parts) + "\n"


def _width(w: int) -> str:
    return "" if w == 1 else f"[{w - 1}:0] "


def render_feedback(diags: Sequence[Diagnostic]) -> str:
    lines = ["## Feedback on your previous answer",
             "The checks below failed. Correct every issue and regenerate the complete module."]
    for d in diags:
        line = f"- {d.rule} {d.severity} at {d.location()}: {d.message}"
        if d.hint:
            line += f" (hint: {d.hint})"
        lines.append(line)
    return "\n".join(lines)


def build_prompt(manifest: DesignManifest, target: str, role: RoleConfig = RoleConfig(),
                 prior: Sequence[Diagnostic] = ()) -> RolePrompt:
    try:
        spec = manifest.module(target)
    except KeyError:
        raise PromptError(f"module {target} is not in the manifest") from None

    style = "## Coding style\n" + "\n".join(f"- [{code}] {text}" for code, text in role.style)

    ports = [f"    {p.direction} {_width(p.width)}{p.name}" for p in spec.ports]
    interface = (f"## Interface\nmodule {spec.name} (\n" + ",\n".join(ports) + "\n);\n"
                 + "\n".join(f"// {p.name}: {p.direction}, {p.width} bit{'s' if p.width > 1 else ''}"
                             for p in spec.ports))

    conv = [f"## Clock and reset",
            f"- Clock: {manifest.clock.name}, rising edge"
            + (f", {manifest.clock.frequency_mhz} MHz" if manifest.clock.frequency_mhz else "")
            + "."]
    if manifest.reset is not None:
        r = manifest.reset
        conv.append(f"- Reset: {r.name}, active {'low' if r.active_low else 'high'}, "
                    f"{'asynchronous' if r.is_async else 'synchronous'}.")
    if spec.frequency_mhz:
        conv.append(f"- This module runs at {spec.frequency_mhz} MHz.")

    task = [f"## Task", f"Write the Verilog module {spec.name}."]
    if spec.description:
        task.append(spec.description)
    if spec.children:
        task.append("Instantiate exactly these submodules (their modules already exist):")
        task.extend(f"- {c.module} {c.instance}" for c in spec.children)

    feedback = render_feedback(prior) if prior else None
    return RolePrompt(role.preamble, style, interface, "\n".join(conv), "\n".join(task), feedback)
