"""Lint configuration: per-rule enable/severity and strictness flags."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..diagnostics import ERROR, RULES, WARNING

_LEVELS = {"off": None, "warn": WARNING, "warning": WARNING, "error": ERROR}


class LintConfigError(ValueError):
    pass


@dataclass
class LintConfig:
    rules: dict = field(default_factory=dict)   # code -> "off" | "warn" | "error"
    deny_warnings: bool = False
    # report default-then-override inside one always block as an LLM003 warning
    intra_process_multidrive: bool = True

    def __post_init__(self):
        unknown = sorted(set(self.rules) - set(RULES))
        if unknown:
            raise LintConfigError(f"unknown rule code(s) in lint config: {', '.join(unknown)}")
        bad = {k: v for k, v in self.rules.items() if v not in _LEVELS}
        if bad:
            k, v = next(iter(bad.items()))
            raise LintConfigError(f"bad level {v!r} for {k}; use off, warn or error")

    @classmethod
    def from_args(cls, specs, deny_warnings=False, intra_process_multidrive=True):
        """Build from ``CODE=level`` strings."""
        rules = {}
        for spec in specs or ():
            if "=" not in spec:
                raise LintConfigError(f"expected CODE=off|warn|error, got {spec!r}")
            code, level = spec.split("=", 1)
            rules[code.strip().upper()] = level.strip().lower()
        return cls(rules, deny_warnings, intra_process_multidrive)

    def enabled(self, code: str) -> bool:
        return self.rules.get(code, "on") != "off"

    def apply(self, diags):
        out = []
        for d in diags:
            level = self.rules.get(d.rule)
            if level == "off":
                continue
            if level is not None:
                d = replace(d, severity=_LEVELS[level])
            if self.deny_warnings and d.severity == WARNING:
                d = replace(d, severity=ERROR)
            out.append(d)
        return out
