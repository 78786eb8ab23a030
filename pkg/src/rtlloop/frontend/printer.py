"""Canonical Verilog emission from a syntax tree."""

from __future__ import annotations

from . import ast as A
from .parser import BINARY_PREC


class PrettyPrintError(ValueError):
    pass


_TERNARY_PREC = 0
_UNARY_PREC = 12
_PRIMARY_PREC = 13


def _prec(e) -> int:
    if isinstance(e, A.Ternary):
        return _TERNARY_PREC
    if isinstance(e, A.Binary):
        return BINARY_PREC[e.op]
    if isinstance(e, A.Unary):
        return _UNARY_PREC
    return _PRIMARY_PREC


def expr_text(e) -> str:
    if isinstance(e, A.Identifier):
        return e.name
    if isinstance(e, A.Number):
        return e.literal.text()
    if isinstance(e, A.StringLit):
        return e.text
    if isinstance(e, A.MacroRef):
        return "`" + e.name
    if isinstance(e, A.Unary):
        inner = expr_text(e.operand)
        if _prec(e.operand) < _PRIMARY_PREC:
            inner = f"({inner})"
        return e.op + inner
    if isinstance(e, A.Binary):
        p = BINARY_PREC[e.op]
        left, right = expr_text(e.left), expr_text(e.right)
        # left assoc: left child may share precedence, right child may not
        lp, rp = _prec(e.left), _prec(e.right)
        if e.op == "**":
            lp, rp = lp - 1, rp + 1
        if lp < p:
            left = f"({left})"
        if rp <= p:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    if isinstance(e, A.Ternary):
        cond = expr_text(e.cond)
        if _prec(e.cond) <= _TERNARY_PREC:
            cond = f"({cond})"
        return f"{cond} ? {expr_text(e.then)} : {expr_text(e.other)}"
    if isinstance(e, A.Concat):
        return "{" + ", ".join(expr_text(p) for p in e.parts) + "}"
    if isinstance(e, A.Replicate):
        count = expr_text(e.count)
        if _prec(e.count) < _PRIMARY_PREC:
            count = f"({count})"
        return "{" + count + "{" + ", ".join(expr_text(p) for p in e.parts) + "}}"
    if isinstance(e, A.Index):
        return f"{expr_text(e.base)}[{expr_text(e.index)}]"
    if isinstance(e, A.Slice):
        return f"{expr_text(e.base)}[{expr_text(e.msb)}{e.mode}{expr_text(e.lsb)}]"
    if isinstance(e, A.Call):
        if not e.args:
            return e.name
        return f"{e.name}({', '.join(expr_text(a) for a in e.args)})"
    raise PrettyPrintError("cannot print recovered tree")


def _range(r) -> str:
    return "" if r is None else f"[{expr_text(r.msb)}:{expr_text(r.lsb)}] "


class _Writer:
    def __init__(self):
        self.lines: list[str] = []
        self.indent = 0

    def line(self, text: str):
        self.lines.append("    " * self.indent + text)

    def stmt(self, s, lead: str = ""):
        """Emit a statement; ``lead`` prefixes the first line (e.g. 'else ')."""
        if isinstance(s, A.Block):
            label = f" : {s.name}" if s.name else ""
            self.line(f"{lead}begin{label}")
            self.indent += 1
            for x in s.stmts:
                self.stmt(x)
            self.indent -= 1
            self.line("end")
        elif isinstance(s, A.Assign):
            op = "=" if s.blocking else "<="
            self.line(f"{lead}{expr_text(s.target)} {op} {expr_text(s.value)};")
        elif isinstance(s, A.If):
            self.line(f"{lead}if ({expr_text(s.cond)})")
            self._nested(s.then)
            if s.other is not None:
                if isinstance(s.other, A.If):
                    self.stmt(s.other, lead="else ")
                else:
                    self.line("else")
                    self._nested(s.other)
        elif isinstance(s, A.Case):
            self.line(f"{lead}{s.kind} ({expr_text(s.expr)})")
            self.indent += 1
            for arm in s.arms:
                self.line(", ".join(expr_text(l) for l in arm.labels) + ":")
                self._nested(arm.body)
            if s.default is not None:
                self.line("default:")
                self._nested(s.default)
            self.indent -= 1
            self.line("endcase")
        elif isinstance(s, A.NullStmt):
            self.line(f"{lead};")
        elif isinstance(s, A.Delay):
            self.line(f"{lead}#{expr_text(s.amount)}")
            self._nested(s.stmt)
        elif isinstance(s, A.TaskCall):
            args = f"({', '.join(expr_text(a) for a in s.args)})" if s.args else ""
            self.line(f"{lead}{s.name}{args};")
        else:
            raise PrettyPrintError("cannot print recovered tree")

    def _nested(self, s):
        self.indent += 1
        self.stmt(s)
        self.indent -= 1


def _conns(conns) -> str:
    out = []
    for c in conns:
        e = "" if c.expr is None else expr_text(c.expr)
        out.append(e if c.name is None else f".{c.name}({e})")
    return ", ".join(out)


def _module(m: A.ModuleDecl, w: _Writer):
    header = f"module {m.name}"
    if m.params:
        ps = []
        for p in m.params:
            kw = "localparam" if p.local else "parameter"
            ps.append(f"{kw} {_range(p.range)}{p.name} = {expr_text(p.value)}")
        header += " #(" + ", ".join(ps) + ")"
    if m.ports:
        w.line(header + " (")
        w.indent += 1
        for i, p in enumerate(m.ports):
            kind = "reg " if p.kind == "reg" else ""
            signed = "signed " if p.signed else ""
            sep = "," if i < len(m.ports) - 1 else ""
            w.line(f"{p.direction} {kind}{signed}{_range(p.range)}{p.name}{sep}")
        w.indent -= 1
        w.line(");")
    else:
        w.line(header + ";")
    w.indent += 1
    for it in m.items:
        if isinstance(it, A.ParamDecl):
            kw = "localparam" if it.local else "parameter"
            w.line(f"{kw} {_range(it.range)}{it.name} = {expr_text(it.value)};")
        elif isinstance(it, A.NetDecl):
            signed = "signed " if it.signed else ""
            names = []
            for nm, init in zip(it.names, it.inits):
                names.append(nm if init is None else f"{nm} = {expr_text(init)}")
            w.line(f"{it.kind} {signed}{_range(it.range)}{', '.join(names)};")
        elif isinstance(it, A.ContinuousAssign):
            delay = "" if it.delay is None else f"#{expr_text(it.delay)} "
            w.line(f"assign {delay}{expr_text(it.target)} = {expr_text(it.value)};")
        elif isinstance(it, A.AlwaysBlock):
            if it.sensitivity is None:
                head = "always"
            elif it.sensitivity == "*":
                head = "always @(*)"
            else:
                evs = []
                for ev in it.sensitivity:
                    pol = f"{ev.polarity} " if ev.polarity else ""
                    evs.append(pol + expr_text(ev.signal))
                head = f"always @({' or '.join(evs)})"
            w.stmt(it.body, lead=head + " ")
        elif isinstance(it, A.InitialBlock):
            w.stmt(it.body, lead="initial ")
        elif isinstance(it, A.Instantiation):
            params = f" #({_conns(it.params)})" if it.params else ""
            w.line(f"{it.module}{params} {it.name} ({_conns(it.connections)});")
        else:
            raise PrettyPrintError("cannot print recovered tree")
    w.indent -= 1
    w.line("endmodule")


def pretty_print(tree: A.Ast) -> str:
    """Emit normalized source for a tree that parsed without errors."""
    if tree.recovered:
        raise PrettyPrintError("cannot print recovered tree")
    for node in tree.walk():
        if isinstance(node, (A.ErrorExpr, A.ErrorStmt)):
            raise PrettyPrintError("cannot print recovered tree")
    w = _Writer()
    for i, m in enumerate(tree.modules):
        if i:
            w.lines.append("")
        _module(m, w)
    return "\n".join(w.lines) + "\n"
