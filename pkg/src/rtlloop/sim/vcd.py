"""Value Change Dump writer and reader.

One timestamp unit per cycle.  A trailing timestamp equal to the cycle
count marks the end of the dump so constant traces keep their length.
"""

from __future__ import annotations

from .trace import Trace

_ID_CHARS = "".join(chr(i) for i in range(33, 127))


class VcdError(ValueError):
    pass


def _var_id(n: int) -> str:
    base = len(_ID_CHARS)
    out = _ID_CHARS[n % base]
    n //= base
    while n:
        n -= 1
        out = _ID_CHARS[n % base] + out
        n //= base
    return out


def _value(v: int, width: int, ident: str) -> str:
    if width == 1:
        return f"{v}{ident}"
    return f"b{v:b} {ident}"


def write_vcd(trace: Trace, top: str = "top", kinds: dict = None,
              timescale: str = "1ns") -> bytes:
    """Serialize ``trace``; dotted names become nested scopes under ``top``."""
    if trace.cycles < 1:
        raise VcdError("cannot write an empty trace")
    kinds = kinds or {}
    names = list(trace.signals)
    ids = {n: _var_id(i) for i, n in enumerate(names)}

    tree: dict = {}
    for n in names:
        node = tree
        parts = n.split(".")
        for p in parts[:-1]:
            node = node.setdefault(("scope", p), {})
        node[("var", parts[-1])] = n

    lines = ["$date rtlloop $end", "$version rtlloop $end", f"$timescale {timescale} $end"]

    def emit(node, name):
        lines.append(f"$scope module {name} $end")
        for (kind, label), child in node.items():
            if kind == "var":
                vtype = "reg" if kinds.get(child) == "state" else "wire"
                lines.append(f"$var {vtype} {trace.widths[child]} {ids[child]} {label} $end")
        for (kind, label), child in node.items():
            if kind == "scope":
                emit(child, label)
        lines.append("$upscope $end")

    emit(tree, top)
    lines.append("$enddefinitions $end")
    lines.append("#0")
    lines.append("$dumpvars")
    for n in names:
        lines.append(_value(trace.signals[n][0], trace.widths[n], ids[n]))
    lines.append("$end")
    for t in range(1, trace.cycles):
        changes = [n for n in names if trace.signals[n][t] != trace.signals[n][t - 1]]
        if changes:
            lines.append(f"#{t}")
            for n in changes:
                lines.append(_value(trace.signals[n][t], trace.widths[n], ids[n]))
    lines.append(f"#{trace.cycles}")
    return ("\n".join(lines) + "\n").encode()


def read_vcd(data: bytes) -> Trace:
    """Parse a VCD produced by :func:`write_vcd` (or any two-state VCD)."""
    tokens = data.decode().split()
    i = 0
    scope: list[str] = []
    by_id: dict[str, list[str]] = {}
    widths: dict[str, int] = {}
    order: list[str] = []

    def until_end(j):
        k = tokens.index("$end", j)
        return tokens[j:k], k + 1

    while i < len(tokens):
        tok = tokens[i]
        if tok == "$scope":
            body, i = until_end(i + 1)
            # the outermost scope is the top module and does not prefix names
            scope.append(body[-1] if scope else None)
        elif tok == "$upscope":
            _, i = until_end(i + 1)
            scope.pop()
        elif tok == "$var":
            body, i = until_end(i + 1)
            _, width, ident, label = body[:4]
            name = ".".join([s for s in scope if s] + [label])
            by_id.setdefault(ident, []).append(name)
            widths[name] = int(width)
            order.append(name)
        elif tok == "$enddefinitions":
            _, i = until_end(i + 1)
            break
        elif tok.startswith("$"):
            _, i = until_end(i + 1)
        else:
            raise VcdError(f"unexpected header token {tok!r}")

    current = {n: 0 for n in order}
    samples = {n: [] for n in order}
    time = None

    def advance_to(t):
        nonlocal time
        if time is not None:
            for _ in range(time, t):
                for n in order:
                    samples[n].append(current[n])
        time = t

    while i < len(tokens):
        tok = tokens[i]
        i += 1
        if tok.startswith("#"):
            t = int(tok[1:])
            if time is not None and t < time:
                raise VcdError("timestamps must increase")
            advance_to(t)
        elif tok in ("$dumpvars", "$end", "$dumpall", "$dumpon", "$dumpoff"):
            continue
        elif tok[0] in "bB":
            ident = tokens[i]
            i += 1
            bits = tok[1:].lower().replace("x", "0").replace("z", "0")
            for n in by_id.get(ident, []):
                current[n] = int(bits, 2)
        elif tok[0] in "01xzXZ":
            v = 1 if tok[0] == "1" else 0
            for n in by_id.get(tok[1:], []):
                current[n] = v
        else:
            raise VcdError(f"unexpected token {tok!r}")
    cycles = time or 0
    return Trace(cycles, {n: samples[n] for n in order}, widths)
