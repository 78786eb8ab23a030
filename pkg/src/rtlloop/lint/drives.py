"""Drive-site collection: who assigns which signal, from which process."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

from ..diagnostics import Span
from ..frontend import ast as A
from ..frontend.consteval import NotConstant, const_eval, module_params, range_bounds


@dataclass(frozen=True)
class DriveSite:
    module: str
    signal: str
    process: str
    kind: str                       # blocking | nonblocking | continuous | instance
    span: Span
    bits: Optional[tuple] = None    # (lo, hi) in declared index space; None = whole

    def overlaps(self, other: "DriveSite") -> bool:
        if self.bits is None or other.bits is None:
            return True
        return self.bits[0] <= other.bits[1] and other.bits[0] <= self.bits[1]


@dataclass
class DriveMap:
    sites: dict = field(default_factory=lambda: defaultdict(list))
    # process id -> kind of process (always | assign | instance | initial)
    process_kinds: dict = field(default_factory=dict)

    def add(self, site: DriveSite):
        self.sites[(site.module, site.signal)].append(site)

    def of(self, module: str, signal: str) -> list:
        return list(self.sites.get((module, signal), []))

    def processes(self, module: str, signal: str) -> set:
        return {s.process for s in self.of(module, signal)}

    def __len__(self):
        return sum(len(v) for v in self.sites.values())


def safe_params(mod: A.ModuleDecl) -> dict:
    try:
        return module_params(mod)
    except (NotConstant, RecursionError):
        return {}


def signal_bounds(mod: A.ModuleDecl, params: dict = None) -> dict:
    """name -> (msb, lsb) for every port and net of ``mod`` with a constant range."""
    params = safe_params(mod) if params is None else params
    out = {}
    decls = [(p.name, p.range) for p in mod.ports]
    for it in mod.items:
        if isinstance(it, A.NetDecl):
            if it.kind == "integer":
                decls.extend((n, None) for n in it.names)
                for n in it.names:
                    out[n] = (31, 0)
                continue
            decls.extend((n, it.range) for n in it.names)
    for name, rng in decls:
        if name in out:
            continue
        try:
            out[name] = range_bounds(rng, params)
        except NotConstant:
            pass
    return out


def select_bits(target, params: dict) -> Optional[tuple]:
    """Bit range written by an lvalue select, or None when whole/unknown."""
    try:
        if isinstance(target, A.Index):
            i = const_eval(target.index, params)
            return (i, i)
        if isinstance(target, A.Slice):
            a = const_eval(target.msb, params)
            b = const_eval(target.lsb, params)
            if target.mode == "+:":
                return (a, a + b - 1)
            if target.mode == "-:":
                return (a - b + 1, a)
            return (min(a, b), max(a, b))
    except NotConstant:
        return None
    return None


def lvalue_parts(target):
    """Yield (base name, select node) for each assigned piece of an lvalue."""
    if isinstance(target, A.Concat):
        for p in target.parts:
            yield from lvalue_parts(p)
        return
    node = target
    while isinstance(node, (A.Index, A.Slice)):
        if isinstance(node.base, A.Identifier):
            yield node.base.name, node
            return
        node = node.base
    if isinstance(node, A.Identifier):
        yield node.name, node


def statement_assigns(stmt):
    """All procedural Assign nodes reachable inside ``stmt`` in source order."""
    if stmt is None or isinstance(stmt, (A.ErrorStmt,)):
        return
    if isinstance(stmt, A.Assign):
        yield stmt
    elif isinstance(stmt, A.Block):
        for s in stmt.stmts:
            yield from statement_assigns(s)
    elif isinstance(stmt, A.If):
        yield from statement_assigns(stmt.then)
        yield from statement_assigns(stmt.other)
    elif isinstance(stmt, A.Case):
        for arm in stmt.arms:
            yield from statement_assigns(arm.body)
        yield from statement_assigns(stmt.default)
    elif isinstance(stmt, A.Delay):
        yield from statement_assigns(stmt.stmt)


def process_id(mod: A.ModuleDecl, index: int, item) -> str:
    kind = {A.AlwaysBlock: "always", A.ContinuousAssign: "assign",
            A.InitialBlock: "initial", A.Instantiation: "instance"}[type(item)]
    line = item.span.line if item.span else 0
    if isinstance(item, A.Instantiation):
        return f"{mod.name}.{item.name}"
    return f"{mod.name}.{kind}@{line}#{index}"


def _connected_ports(inst: A.Instantiation, child: A.ModuleDecl):
    for i, conn in enumerate(inst.connections):
        if conn.expr is None:
            continue
        if conn.name is None:
            if i < len(child.ports):
                yield child.ports[i], conn
        else:
            port = child.port(conn.name)
            if port is not None:
                yield port, conn


def build_drive_map(tree: A.Ast) -> DriveMap:
    """Collect every drive site of every module in ``tree``."""
    dm = DriveMap()
    modules = {m.name: m for m in tree.modules}
    for mod in tree.modules:
        params = safe_params(mod)
        for index, item in enumerate(mod.items):
            if isinstance(item, (A.AlwaysBlock, A.InitialBlock)):
                pid = process_id(mod, index, item)
                dm.process_kinds[pid] = "initial" if isinstance(item, A.InitialBlock) else "always"
                for asg in statement_assigns(item.body):
                    kind = "blocking" if asg.blocking else "nonblocking"
                    for name, sel in lvalue_parts(asg.target):
                        dm.add(DriveSite(mod.name, name, pid, kind, asg.span,
                                         select_bits(sel, params)))
            elif isinstance(item, A.ContinuousAssign):
                pid = process_id(mod, index, item)
                dm.process_kinds[pid] = "assign"
                for name, sel in lvalue_parts(item.target):
                    dm.add(DriveSite(mod.name, name, pid, "continuous", item.span,
                                     select_bits(sel, params)))
            elif isinstance(item, A.NetDecl) and item.kind == "wire":
                # a reg initializer is a start value, not a driver
                for name, init in zip(item.names, item.inits):
                    if init is not None:
                        pid = f"{mod.name}.init:{name}"
                        dm.process_kinds[pid] = "assign"
                        dm.add(DriveSite(mod.name, name, pid, "continuous", item.span))
            elif isinstance(item, A.Instantiation):
                child = modules.get(item.module)
                if child is None:
                    continue
                pid = process_id(mod, index, item)
                dm.process_kinds[pid] = "instance"
                for port, conn in _connected_ports(item, child):
                    if port.direction == "input":
                        continue
                    for name, sel in lvalue_parts(conn.expr):
                        dm.add(DriveSite(mod.name, name, pid, "instance", conn.span,
                                         select_bits(sel, params)))
    return dm
