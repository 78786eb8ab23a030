"""Pull Verilog source out of a free-form model response."""

from __future__ import annotations

import re

_FENCE = re.compile(r"^[ \t]*```[ \t]*([\w+-]*)[^\n]*\n(.*?)^[ \t]*```", re.S | re.M)
_MODULE = re.compile(r"\bmodule\b.*?\bendmodule\b", re.S)
_HAS_MODULE = re.compile(r"\bmodule\b")
_VERILOG_TAGS = {"verilog", "v", "systemverilog", "sv"}


def extract_code(response: str) -> list:
    """Source units in response order; empty when nothing looks like a module."""
    units = []
    for m in _FENCE.finditer(response):
        tag, body = m.group(1).lower(), m.group(2)
        if tag in _VERILOG_TAGS or (not tag and _HAS_MODULE.search(body)):
            if body.strip():
                units.append(body if body.endswith("\n") else body + "\n")
    if units:
        return units
    return [m.group(0) + "\n" for m in _MODULE.finditer(response)]
