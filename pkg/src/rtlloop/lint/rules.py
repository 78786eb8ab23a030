"""Lint rules LLM001-LLM007 for LLM-generated Verilog."""

from __future__ import annotations

from dataclasses import replace
from itertools import product

from ..diagnostics import ERROR, RULES, WARNING, Diagnostic, make, sort_diagnostics
from ..frontend import ast as A
from ..frontend.consteval import NotConstant, const_eval, self_width
from ..frontend.printer import expr_text
from .config import LintConfig
from .drives import (DriveMap, lvalue_parts, safe_params, select_bits, signal_bounds,
                     statement_assigns)

_SYNC_FOUND = {"}", "endmodule", "endcase", "end of input", "always", "assign", "initial",
               "module"}


# -- LLM001 / LLM002: re-tag parser recovery events ----------------------------

def _retag(diag: Diagnostic):
    if diag.rule != "SYN000":
        return None
    if diag.expected == "end" and (diag.found in _SYNC_FOUND):
        return "LLM001"
    if diag.expected == "endcase":
        return "LLM002"
    return None


# -- LLM003 ---------------------------------------------------------------------

def _cross_process(dm: DriveMap) -> list:
    out = []
    for (module, signal), sites in sorted(dm.sites.items()):
        sites = [s for s in sites if dm.process_kinds.get(s.process) != "initial"]
        involved = set()
        for i, a in enumerate(sites):
            for b in sites[i + 1:]:
                if a.process != b.process and a.overlaps(b):
                    involved.update((a, b))
        if not involved:
            continue
        ordered = sorted(involved, key=lambda s: s.span.start)
        procs = sorted({s.process.split(".", 1)[1] for s in ordered})
        first = ordered[0]
        out.append(make(
            "LLM003", first.span,
            f"'{signal}' is driven from {len(procs)} processes ({', '.join(procs)})",
            hint=f"drive '{signal}' from a single always block or assign; "
                 "merge the logic or use separate signals",
            related=tuple(s.span for s in ordered[1:]),
        ))
    return out


def _reassignments(stmt, params, found: dict):
    """Return {(name, bits)-list} possibly assigned by ``stmt``; record re-assignments.

    ``found`` maps signal name to the list of Assign nodes involved in a
    sequential default-then-override pattern.
    """
    def pieces(asg):
        return [(n, select_bits(sel, params)) for n, sel in lvalue_parts(asg.target)]

    def overlap(a, b):
        return a is None or b is None or (a[0] <= b[1] and b[0] <= a[1])

    if isinstance(stmt, A.Assign):
        return [(n, bits, stmt) for n, bits in pieces(stmt)]
    if isinstance(stmt, A.Block):
        seen = []
        for s in stmt.stmts:
            cur = _reassignments(s, params, found)
            for name, bits, node in cur:
                for pname, pbits, pnode in seen:
                    if pname == name and overlap(bits, pbits):
                        lst = found.setdefault(name, [])
                        for n in (pnode, node):
                            if all(n is not x for x in lst):
                                lst.append(n)
            seen.extend(cur)
        return seen
    if isinstance(stmt, A.If):
        return (_reassignments(stmt.then, params, found)
                + _reassignments(stmt.other, params, found))
    if isinstance(stmt, A.Case):
        acc = []
        for arm in stmt.arms:
            acc += _reassignments(arm.body, params, found)
        return acc + _reassignments(stmt.default, params, found)
    if isinstance(stmt, A.Delay):
        return _reassignments(stmt.stmt, params, found)
    return []


def _intra_process(mod: A.ModuleDecl, params) -> list:
    out = []
    for item in mod.items_of(A.AlwaysBlock):
        found: dict = {}
        _reassignments(item.body, params, found)
        for name, nodes in found.items():
            nodes = sorted(nodes, key=lambda n: n.span.start)
            out.append(make(
                "LLM003", nodes[0].span,
                f"'{name}' is assigned {len(nodes)} times within one always block; "
                "later assignments override earlier ones",
                hint=f"make the assignments to '{name}' mutually exclusive (if/else or "
                     "case branches) so each path drives it once",
                severity=WARNING,
                related=tuple(n.span for n in nodes[1:]),
            ))
    return out


# -- LLM004 -----------------------------------------------------------------------

def _names(expr) -> set:
    return {n.name for n in expr.walk() if isinstance(n, A.Identifier)}


def _ambiguous_clock(mod: A.ModuleDecl) -> list:
    out = []
    for item in mod.items_of(A.AlwaysBlock):
        edges = item.edges
        if len(edges) < 2:
            continue
        edge_names = [expr_text(e.signal) for e in edges]
        events = ", ".join(f"{e.polarity} {n}" for e, n in zip(edges, edge_names))
        body = item.body.stmts if isinstance(item.body, A.Block) else [item.body]
        body = [s for s in body if not isinstance(s, A.NullStmt)]
        if not body:
            continue
        first = body[0]
        guard = None
        if isinstance(first, A.If) and first.other is not None:
            tested = _names(first.cond) & set(edge_names)
            if len(tested) == 1 and len(set(edge_names)) == 2:
                guard = tested.pop()
        if guard is None:
            out.append(make(
                "LLM004", first.span,
                f"always @({events}) has more than one edge but its body is not a single "
                "if/else on the asynchronous control signal",
                hint="structure the block as: if (<reset test>) <reset branch> else "
                     "<clocked branch>, with nothing before or after it"))
            continue
        clock = next(n for n in edge_names if n != guard)
        for stmt in body[1:]:
            out.append(make(
                "LLM004", stmt.span,
                f"statement after the if/else on '{guard}' executes on both the {clock} and "
                f"{guard} edges (ambiguous clock)",
                hint=f"move this statement inside the else branch (clocked by '{clock}') or "
                     f"the '{guard}' branch"))
    return out


# -- LLM005 / LLM006 --------------------------------------------------------------

class _Widths:
    def __init__(self, mod, params):
        self.bounds = signal_bounds(mod, params)
        self.params = params

    def width(self, name):
        msb, lsb = self.bounds[name]
        return abs(msb - lsb) + 1

    def mask(self, name, bits):
        """Bitmask (normalized to bit 0 = lsb) for a select of ``name``."""
        if name not in self.bounds:
            return None
        msb, lsb = self.bounds[name]
        w = abs(msb - lsb) + 1
        full = (1 << w) - 1
        if bits is None:
            return full
        m = 0
        for i in range(bits[0], bits[1] + 1):
            pos = i - lsb if msb >= lsb else lsb - i
            if 0 <= pos < w:
                m |= 1 << pos
        return m


def _meet(a: dict, b: dict) -> dict:
    return {k: a[k] & b[k] for k in a.keys() & b.keys() if a[k] & b[k]}


def _join(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) | v
    return out


def case_exhaustive(case: A.Case, widths: _Widths) -> bool:
    try:
        w = self_width(case.expr, widths.width, widths.params)
    except (KeyError, NotConstant):
        return False
    if w > 12:
        return False
    covered = set()
    wild_chars = {"casez": "z?", "casex": "xz?"}.get(case.kind, "")
    for arm in case.arms:
        for lab in arm.labels:
            if isinstance(lab, A.Number) and lab.literal.xz_mask and wild_chars:
                lit = lab.literal
                if any(c == "x" for c in lit.digits) and "x" not in wild_chars:
                    continue
                care = ~lit.xz_mask & ((1 << w) - 1)
                val = lit.value & care
                free = [i for i in range(w) if not (care >> i) & 1]
                for combo in product((0, 1), repeat=len(free)):
                    v = val
                    for bit, on in zip(free, combo):
                        v |= on << bit
                    covered.add(v)
                continue
            try:
                covered.add(const_eval(lab, widths.params) & ((1 << w) - 1))
            except NotConstant:
                pass
    return len(covered) == (1 << w)


def _definite(stmt, widths: _Widths):
    """(definitely assigned, possibly assigned) maps name -> bitmask."""
    if stmt is None:
        return {}, {}
    if isinstance(stmt, A.Assign):
        d, p = {}, {}
        for name, sel in lvalue_parts(stmt.target):
            bits = select_bits(sel, widths.params)
            dynamic = bits is None and not isinstance(sel, A.Identifier)
            m = widths.mask(name, bits)
            if m is None:
                continue
            p[name] = p.get(name, 0) | m
            if not dynamic:
                d[name] = d.get(name, 0) | m
        return d, p
    if isinstance(stmt, A.Block):
        d, p = {}, {}
        for s in stmt.stmts:
            sd, sp = _definite(s, widths)
            d, p = _join(d, sd), _join(p, sp)
        return d, p
    if isinstance(stmt, A.If):
        td, tp = _definite(stmt.then, widths)
        ed, ep = _definite(stmt.other, widths)
        return _meet(td, ed), _join(tp, ep)
    if isinstance(stmt, A.Case):
        branches = [arm.body for arm in stmt.arms]
        complete = stmt.default is not None or case_exhaustive(stmt, widths)
        if stmt.default is not None:
            branches.append(stmt.default)
        d, p = None, {}
        for b in branches:
            bd, bp = _definite(b, widths)
            d = bd if d is None else _meet(d, bd)
            p = _join(p, bp)
        if d is None or not complete:
            d = {}
        return d, p
    if isinstance(stmt, A.Delay):
        return _definite(stmt.stmt, widths)
    return {}, {}


def _latches(mod: A.ModuleDecl, widths: _Widths) -> list:
    out = []
    for item in mod.items_of(A.AlwaysBlock):
        if not item.is_combinational:
            continue
        d, p = _definite(item.body, widths)
        first_site = {}
        for asg in statement_assigns(item.body):
            for name, _ in lvalue_parts(asg.target):
                first_site.setdefault(name, asg.span)
        for name in sorted(p):
            if p[name] & ~d.get(name, 0):
                out.append(make(
                    "LLM005", first_site.get(name, item.span),
                    f"'{name}' is not assigned on every path through this combinational "
                    "block; a latch will be inferred",
                    hint=f"assign a default to '{name}' at the top of the block or add the "
                         "missing else/default branch"))
    return out


def _case_defaults(mod: A.ModuleDecl, widths: _Widths) -> list:
    out = []
    for item in mod.items_of(A.AlwaysBlock):
        if not item.is_combinational:
            continue
        for node in item.body.walk():
            if isinstance(node, A.Case) and node.default is None \
                    and not case_exhaustive(node, widths):
                out.append(make(
                    "LLM006", node.span,
                    f"{node.kind} without default does not cover every value of "
                    f"'{expr_text(node.expr) if not isinstance(node.expr, A.ErrorExpr) else '?'}'",
                    hint="add a 'default:' branch"))
    return out


# -- LLM007 -------------------------------------------------------------------------

def _non_synth(mod: A.ModuleDecl) -> list:
    out = []
    for item in mod.items:
        if isinstance(item, A.InitialBlock):
            out.append(make("LLM007", item.span, "initial block is not synthesizable",
                            hint="use a reset branch to set initial values"))
        elif isinstance(item, A.ContinuousAssign) and item.delay is not None:
            out.append(make("LLM007", item.span, "delays (#) are ignored by synthesis",
                            hint="remove the delay"))
        elif isinstance(item, A.AlwaysBlock):
            for node in item.body.walk():
                if isinstance(node, A.Delay):
                    out.append(make("LLM007", node.span, "delays (#) are ignored by synthesis",
                                    hint="remove the delay"))
    return out


# -- driver -------------------------------------------------------------------------

def lint(tree: A.Ast, drive_map: DriveMap = None, config: LintConfig = None) -> list:
    """Run every enabled rule; returns diagnostics ordered by (file, offset, rule).

    Parse-phase diagnostics attached to ``tree`` are passed through, with
    block-mismatch recoveries re-tagged as LLM001/LLM002.
    """
    config = config or LintConfig()
    if drive_map is None:
        from .drives import build_drive_map
        drive_map = build_drive_map(tree)
    raw: list[Diagnostic] = []
    for d in tree.diagnostics:
        code = _retag(d)
        if code:
            d = replace(d, rule=code, severity=RULES[code][1])
        raw.append(d)
    raw += _cross_process(drive_map)
    for mod in tree.modules:
        params = safe_params(mod)
        widths = _Widths(mod, params)
        if config.intra_process_multidrive:
            raw += _intra_process(mod, params)
        raw += _ambiguous_clock(mod)
        raw += _latches(mod, widths)
        raw += _case_defaults(mod, widths)
        raw += _non_synth(mod)
    return sort_diagnostics(config.apply(raw))
