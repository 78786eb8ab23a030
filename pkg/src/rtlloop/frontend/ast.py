"""Syntax tree for the supported Verilog subset.

Every node carries a ``span``; spans (and other bookkeeping fields) are
excluded from equality so two trees compare structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Optional, Union

from ..diagnostics import Span

from .tokens import Literal


def _span():
    return field(default=None, compare=False, repr=False)


class Node:
    span: Span

    def children(self):
        for f in fields(self):
            if not f.compare:
                continue
            v = getattr(self, f.name)
            if isinstance(v, Node):
                yield v
            elif isinstance(v, (list, tuple)):
                for x in v:
                    if isinstance(x, Node):
                        yield x

    def walk(self):
        yield self
        for c in self.children():
            yield from c.walk()


# -- expressions ---------------------------------------------------------

@dataclass
class Identifier(Node):
    name: str
    span: Span = _span()


@dataclass
class Number(Node):
    literal: Literal
    span: Span = _span()


@dataclass
class StringLit(Node):
    text: str
    span: Span = _span()


@dataclass
class MacroRef(Node):
    """Use of a macro that had no definition; kept opaque."""
    name: str
    span: Span = _span()


@dataclass
class Unary(Node):
    op: str
    operand: Node
    span: Span = _span()


@dataclass
class Binary(Node):
    op: str
    left: Node
    right: Node
    span: Span = _span()


@dataclass
class Ternary(Node):
    cond: Node
    then: Node
    other: Node
    span: Span = _span()


@dataclass
class Concat(Node):
    parts: list
    span: Span = _span()


@dataclass
class Replicate(Node):
    count: Node
    parts: list
    span: Span = _span()


@dataclass
class Index(Node):
    base: Node
    index: Node
    span: Span = _span()


@dataclass
class Slice(Node):
    """Part select.  ``mode`` is ':' for [msb:lsb], '+:' / '-:' for indexed."""
    base: Node
    msb: Node
    lsb: Node
    mode: str = ":"
    span: Span = _span()


@dataclass
class Call(Node):
    name: str
    args: list
    span: Span = _span()


@dataclass
class ErrorExpr(Node):
    span: Span = _span()


Expr = Union[Identifier, Number, MacroRef, Unary, Binary, Ternary, Concat,
             Replicate, Index, Slice, Call, ErrorExpr]


# -- statements ----------------------------------------------------------

@dataclass
class Assign(Node):
    """Procedural assignment; ``blocking`` distinguishes '=' from '<='."""
    target: Node
    value: Node
    blocking: bool
    span: Span = _span()


@dataclass
class If(Node):
    cond: Node
    then: Node
    other: Optional[Node] = None
    span: Span = _span()


@dataclass
class CaseArm(Node):
    labels: list
    body: Node
    span: Span = _span()


@dataclass
class Case(Node):
    kind: str          # case | casez | casex
    expr: Node
    arms: list
    default: Optional[Node] = None
    span: Span = _span()


@dataclass
class Block(Node):
    stmts: list
    name: Optional[str] = None
    span: Span = _span()


@dataclass
class NullStmt(Node):
    span: Span = _span()


@dataclass
class Delay(Node):
    amount: Node
    stmt: Node
    span: Span = _span()


@dataclass
class TaskCall(Node):
    name: str
    args: list
    span: Span = _span()


@dataclass
class ErrorStmt(Node):
    span: Span = _span()


# -- module items ----------------------------------------------------------

@dataclass
class Range(Node):
    msb: Node
    lsb: Node
    span: Span = _span()


@dataclass
class PortDecl(Node):
    name: str
    direction: str                 # input | output | inout
    kind: str = "wire"             # wire | reg
    range: Optional[Range] = None
    signed: bool = False
    span: Span = _span()


@dataclass
class ParamDecl(Node):
    name: str
    value: Node
    local: bool = False
    range: Optional[Range] = None
    span: Span = _span()


@dataclass
class NetDecl(Node):
    kind: str                      # wire | reg | integer
    names: list                    # list[str]
    range: Optional[Range] = None
    signed: bool = False
    inits: list = field(default_factory=list)   # parallel to names; None or expr
    span: Span = _span()


@dataclass
class ContinuousAssign(Node):
    target: Node
    value: Node
    delay: Optional[Node] = None
    span: Span = _span()


@dataclass
class EdgeEvent(Node):
    """``polarity`` is 'posedge', 'negedge' or None for a level event."""
    polarity: Optional[str]
    signal: Node
    span: Span = _span()


@dataclass
class AlwaysBlock(Node):
    sensitivity: object            # "*" | list[EdgeEvent] | None
    body: Node
    span: Span = _span()

    @property
    def is_star(self) -> bool:
        return self.sensitivity == "*"

    @property
    def edges(self) -> list:
        if isinstance(self.sensitivity, list):
            return [e for e in self.sensitivity if e.polarity]
        return []

    @property
    def is_combinational(self) -> bool:
        if self.sensitivity == "*":
            return True
        return isinstance(self.sensitivity, list) and not self.edges


@dataclass
class InitialBlock(Node):
    body: Node
    span: Span = _span()


@dataclass
class Connection(Node):
    """Port or parameter connection; ``name`` None for positional."""
    name: Optional[str]
    expr: Optional[Node]
    span: Span = _span()


@dataclass
class Instantiation(Node):
    module: str
    name: str
    params: list
    connections: list
    span: Span = _span()


@dataclass
class ModuleDecl(Node):
    name: str
    params: list
    ports: list
    items: list
    span: Span = _span()
    has_errors: bool = field(default=False, compare=False, repr=False)

    def port(self, name: str) -> Optional[PortDecl]:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    def items_of(self, cls):
        return [it for it in self.items if isinstance(it, cls)]


@dataclass
class Ast(Node):
    modules: list
    span: Span = _span()
    diagnostics: list = field(default_factory=list, compare=False, repr=False)

    @property
    def recovered(self) -> bool:
        return any(d.is_error and d.rule in ("SYN000", "SYN999") for d in self.diagnostics)

    def module(self, name: str) -> Optional[ModuleDecl]:
        for m in self.modules:
            if m.name == name:
                return m
        return None

    @classmethod
    def merge(cls, asts) -> "Ast":
        modules, diags = [], []
        for a in asts:
            modules.extend(a.modules)
            diags.extend(a.diagnostics)
        return cls(modules, diagnostics=diags)
