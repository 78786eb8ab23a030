"""Flatten a module hierarchy and compile its processes to Python.

Every net of every instance gets a hierarchical dotted name.  A port
connected to a plain parent net of the same width shares that net's value
slot; any other connection becomes a small combinational process.  Each
process is translated to Python source working on a flat list of slot
values, so a simulation cycle is a few calls into generated code.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping, Optional

from ..diagnostics import Span, make
from ..frontend import ast as A
from ..frontend.consteval import NotConstant, const_eval, module_params, range_bounds, self_width


class ElaborationError(Exception):
    """The design cannot be flattened or scheduled."""


@dataclass(frozen=True)
class SignalInfo:
    name: str
    slot: int
    width: int
    msb: int
    lsb: int
    kind: str = "combinational"      # state | combinational | input


@dataclass(frozen=True)
class Process:
    name: str
    kind: str                         # comb | edge
    reads: Mapping                    # slot -> bit mask
    writes: Mapping
    source: str = field(repr=False, default="")


@dataclass(frozen=True, eq=False)
class ElaboratedDesign:
    top: str
    signals: Mapping[str, SignalInfo]
    comb: tuple                       # topologically ordered
    edge: tuple
    clock: Optional[str]
    reset: Optional[str]
    reset_active_low: bool
    inputs: tuple
    outputs: tuple
    init: tuple
    warnings: tuple = ()
    settle_fn: Callable = field(default=None, repr=False)
    edge_fn: Callable = field(default=None, repr=False)

    def slot_of(self, name: str) -> int:
        return self.signals[name].slot

    def kinds(self) -> dict:
        return {n: s.kind for n, s in self.signals.items()}

    def canonical(self, slot: int) -> str:
        for n, s in self.signals.items():
            if s.slot == slot:
                return n
        raise KeyError(slot)


def _mask(w: int) -> int:
    return (1 << w) - 1


# -- runtime helpers referenced by generated code ----------------------------

def _div(a, b):
    return a // b if b else 0


def _mod(a, b):
    return a % b if b else 0


def _shl(a, b, w):
    return (a << b) & ((1 << w) - 1) if b < w else 0


def _bit(val, pos, w):
    return (val >> pos) & 1 if 0 <= pos < w else 0


def _part(val, lo, w):
    if lo < 0:
        return (val << -lo) & ((1 << w) - 1)
    return (val >> lo) & ((1 << w) - 1)


def _rep(val, w, n):
    out = 0
    for _ in range(n):
        out = (out << w) | val
    return out


def _parity(x):
    return bin(x).count("1") & 1


_HELPERS = {"_div": _div, "_mod": _mod, "_shl": _shl, "_bit": _bit, "_part": _part,
            "_rep": _rep, "_parity": _parity}


# -- flattening ----------------------------------------------------------------

@dataclass
class _Net:
    node: int
    msb: int
    lsb: int

    @property
    def width(self) -> int:
        return abs(self.msb - self.lsb) + 1


@dataclass
class _Scope:
    prefix: str
    module: A.ModuleDecl
    params: dict
    nets: dict = field(default_factory=dict)


class _UnionFind:
    def __init__(self):
        self.parent: list[int] = []

    def add(self) -> int:
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the lower (earlier, higher in the hierarchy) node as root
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


class _Flattener:
    def __init__(self, modules: dict):
        self.modules = modules
        self.uf = _UnionFind()
        self.scopes: list[_Scope] = []
        self.names: list[tuple[str, _Scope, str]] = []     # (full name, scope, local)
        self.glue: list = []          # (direction, child scope, port, parent scope, expr)
        self.inits: list = []         # (scope, local name, expr): reg start values
        self.net_assigns: list = []   # (scope, local name, expr, span): wire w = expr

    def declare(self, scope, name, rng, span):
        try:
            msb, lsb = range_bounds(rng, scope.params)
        except NotConstant as e:
            raise ElaborationError(f"{scope.module.name}: range of {name} is not constant ({e})")
        net = _Net(self.uf.add(), msb, lsb)
        scope.nets[name] = net
        self.names.append((scope.prefix + name, scope, name))
        return net

    def instantiate(self, mod: A.ModuleDecl, prefix: str, overrides: dict, stack: tuple) -> _Scope:
        try:
            params = module_params(mod, overrides)
        except NotConstant as e:
            raise ElaborationError(f"{mod.name}: parameter value is not constant ({e})")
        scope = _Scope(prefix, mod, params)
        self.scopes.append(scope)
        for p in mod.ports:
            self.declare(scope, p.name, p.range, p.span)
        for it in mod.items:
            if isinstance(it, A.NetDecl):
                for k, n in enumerate(it.names):
                    if n in scope.nets:
                        continue
                    rng = it.range
                    if it.kind == "integer":
                        rng = A.Range(A.Number(_lit(31)), A.Number(_lit(0)))
                    self.declare(scope, n, rng, it.span)
                    init = it.inits[k] if k < len(it.inits) else None
                    if init is not None:
                        if it.kind == "wire":
                            self.net_assigns.append((scope, n, init, it.span))
                        else:
                            self.inits.append((scope, n, init))
        for inst in mod.items_of(A.Instantiation):
            self.instance(scope, inst, stack)
        return scope

    def instance(self, scope: _Scope, inst: A.Instantiation, stack: tuple):
        child = self.modules.get(inst.module)
        if child is None:
            raise ElaborationError(f"{scope.module.name}: instance {inst.name} of unknown "
                                   f"module {inst.module}")
        if inst.module in stack:
            raise ElaborationError(f"recursive instantiation of {inst.module}")
        public = [p.name for p in child.params if not p.local]
        public += [it.name for it in child.items if isinstance(it, A.ParamDecl) and not it.local]
        overrides = {}
        for k, c in enumerate(inst.params):
            name = c.name if c.name is not None else (public[k] if k < len(public) else None)
            if name is None or name not in public:
                raise ElaborationError(f"{scope.module.name}: instance {inst.name} overrides "
                                       f"unknown parameter {c.name or k}")
            if c.expr is None:
                continue
            try:
                overrides[name] = const_eval(c.expr, scope.params)
            except NotConstant as e:
                raise ElaborationError(f"{scope.module.name}: parameter {name} of {inst.name} "
                                       f"is not constant ({e})")
        cscope = self.instantiate(child, scope.prefix + inst.name + ".", overrides,
                                  stack + (inst.module,))
        for k, c in enumerate(inst.connections):
            if c.name is None:
                if k >= len(child.ports):
                    raise ElaborationError(f"{scope.module.name}: instance {inst.name} has "
                                           f"more connections than {child.name} has ports")
                port = child.ports[k]
            else:
                port = child.port(c.name)
                if port is None:
                    raise ElaborationError(f"{scope.module.name}: {child.name} has no port "
                                           f"{c.name} (instance {inst.name})")
            if c.expr is None:
                continue
            e = c.expr
            if isinstance(e, A.Identifier) and e.name in scope.nets:
                if scope.nets[e.name].width == cscope.nets[port.name].width:
                    self.uf.union(scope.nets[e.name].node, cscope.nets[port.name].node)
                    continue
            if port.direction == "inout":
                raise ElaborationError(f"{scope.module.name}: inout port {port.name} of "
                                       f"{inst.name} must connect to a net of equal width")
            self.glue.append((port.direction, cscope, port.name, scope, e))


def _lit(v: int):
    from ..frontend.tokens import Literal
    return Literal(None, "d", str(v))


# -- code generation -----------------------------------------------------------

class _Gen:
    """Python source for one process."""

    def __init__(self, ctx: "_Context", tag: str):
        self.ctx = ctx
        self.tag = tag
        self.lines: list[str] = []
        self.reads: dict[int, int] = {}
        self.writes: dict[int, int] = {}
        self.local: dict[int, str] = {}     # slot -> local variable (blocking in edge code)
        self.tmp = 0

    def fresh(self, stem="t") -> str:
        self.tmp += 1
        return f"_{stem}{self.tag}_{self.tmp}"

    def emit(self, depth: int, text: str):
        self.lines.append("    " * depth + text)

    # signals ------------------------------------------------------------

    def net(self, scope: _Scope, name: str):
        net = scope.nets.get(name)
        if net is None:
            raise ElaborationError(f"{scope.module.name}: unknown signal {name}")
        return net, self.ctx.slot_of(net)

    def width_of(self, scope):
        def w(name):
            net = scope.nets.get(name)
            if net is None:
                raise ElaborationError(f"{scope.module.name}: unknown signal {name}")
            return net.width
        return w

    def sw(self, e, scope) -> int:
        try:
            return self_width(e, self.width_of(scope), scope.params)
        except NotConstant as err:
            raise ElaborationError(f"{scope.module.name}: cannot size expression ({err})")

    def const(self, e, scope) -> int:
        try:
            return const_eval(e, scope.params)
        except NotConstant as err:
            raise ElaborationError(f"{scope.module.name}: expected a constant ({err})")

    def read(self, slot: int, mask: int) -> str:
        self.reads[slot] = self.reads.get(slot, 0) | mask
        return self.local.get(slot, f"v[{slot}]")

    @staticmethod
    def pos_code(net: _Net, index_code: str) -> str:
        if net.msb >= net.lsb:
            return f"({index_code} - {net.lsb})" if net.lsb else index_code
        return f"({net.lsb} - {index_code})"

    @staticmethod
    def pos_const(net: _Net, index: int) -> int:
        return index - net.lsb if net.msb >= net.lsb else net.lsb - index

    # expressions ----------------------------------------------------------

    def expr(self, e, W: int, scope: _Scope) -> str:
        """Code whose value is ``e`` evaluated in a W-bit context (unsigned)."""
        W = max(W, self.sw(e, scope))
        m = _mask(W)
        if isinstance(e, A.Number):
            if e.literal.xz_mask:
                self.ctx.four_state(e)
            return str(e.literal.value & m)
        if isinstance(e, A.Identifier):
            if e.name in scope.params:
                return str(scope.params[e.name] & m)
            net, slot = self.net(scope, e.name)
            return self.read(slot, _mask(net.width))
        if isinstance(e, A.Unary):
            op = e.op
            if op == "+":
                return self.expr(e.operand, W, scope)
            if op == "-":
                return f"((-{self.expr(e.operand, W, scope)}) & {m})"
            if op == "~":
                return f"((~{self.expr(e.operand, W, scope)}) & {m})"
            ow = self.sw(e.operand, scope)
            x = self.expr(e.operand, ow, scope)
            if op == "!":
                return f"int(not {x})"
            if op == "&":
                return f"int({x} == {_mask(ow)})"
            if op == "~&":
                return f"int({x} != {_mask(ow)})"
            if op == "|":
                return f"int({x} != 0)"
            if op == "~|":
                return f"int({x} == 0)"
            if op == "^":
                return f"_parity({x})"
            if op in ("~^", "^~"):
                return f"(1 - _parity({x}))"
            raise ElaborationError(f"unsupported unary operator {op}")
        if isinstance(e, A.Binary):
            return self.binary(e, W, scope)
        if isinstance(e, A.Ternary):
            c = self.expr(e.cond, self.sw(e.cond, scope), scope)
            return f"({self.expr(e.then, W, scope)} if {c} else {self.expr(e.other, W, scope)})"
        if isinstance(e, A.Concat):
            return self.concat(e.parts, scope)
        if isinstance(e, A.Replicate):
            n = self.const(e.count, scope)
            inner_w = sum(self.sw(p, scope) for p in e.parts)
            return f"_rep({self.concat(e.parts, scope)}, {inner_w}, {n})"
        if isinstance(e, A.Index):
            return self.index(e, scope)
        if isinstance(e, A.Slice):
            return self.slice(e, scope)
        if isinstance(e, A.Call):
            if e.name in ("$signed", "$unsigned") and len(e.args) == 1:
                return self.expr(e.args[0], W, scope)
            raise ElaborationError(f"{scope.module.name}: unsupported call {e.name}")
        if isinstance(e, A.MacroRef):
            raise ElaborationError(f"{scope.module.name}: undefined macro {e.name}")
        raise ElaborationError(f"{scope.module.name}: cannot simulate {type(e).__name__}")

    def binary(self, e: A.Binary, W: int, scope: _Scope) -> str:
        op, m = e.op, _mask(W)
        if op in ("==", "!=", "===", "!==", "<", "<=", ">", ">="):
            ow = max(self.sw(e.left, scope), self.sw(e.right, scope))
            a, b = self.expr(e.left, ow, scope), self.expr(e.right, ow, scope)
            py = {"===": "==", "!==": "!="}.get(op, op)
            return f"int({a} {py} {b})"
        if op in ("&&", "||"):
            a = self.expr(e.left, self.sw(e.left, scope), scope)
            b = self.expr(e.right, self.sw(e.right, scope), scope)
            return f"int(bool({a}) {'and' if op == '&&' else 'or'} bool({b}))"
        if op in ("<<", "<<<", ">>", ">>>", "**"):
            a = self.expr(e.left, W, scope)
            b = self.expr(e.right, self.sw(e.right, scope), scope)
            if op in ("<<", "<<<"):
                return f"_shl({a}, {b}, {W})"
            if op == "**":
                return f"pow({a}, {b}, {1 << W})"
            return f"({a} >> {b})"
        a, b = self.expr(e.left, W, scope), self.expr(e.right, W, scope)
        if op in ("+", "-", "*"):
            return f"(({a} {op} {b}) & {m})"
        if op == "/":
            return f"_div({a}, {b})"
        if op == "%":
            return f"_mod({a}, {b})"
        if op in ("&", "|", "^"):
            return f"({a} {op} {b})"
        if op in ("~^", "^~"):
            return f"((~({a} ^ {b})) & {m})"
        raise ElaborationError(f"unsupported binary operator {op}")

    def concat(self, parts, scope) -> str:
        terms, offset = [], 0
        for p in reversed(parts):
            w = self.sw(p, scope)
            x = self.expr(p, w, scope)
            terms.append(f"({x} << {offset})" if offset else x)
            offset += w
        return "(" + " | ".join(reversed(terms)) + ")" if len(terms) > 1 else terms[0]

    def base_net(self, e, scope):
        if not isinstance(e, A.Identifier):
            raise ElaborationError(f"{scope.module.name}: selects apply to named signals only")
        return self.net(scope, e.name)

    def index(self, e: A.Index, scope) -> str:
        if isinstance(e.base, A.Identifier) and e.base.name in scope.params:
            val = scope.params[e.base.name]
            return f"(({val} >> {self.expr(e.index, self.sw(e.index, scope), scope)}) & 1)"
        net, slot = self.base_net(e.base, scope)
        try:
            pos = self.pos_const(net, const_eval(e.index, scope.params))
        except NotConstant:
            val = self.read(slot, _mask(net.width))
            idx = self.expr(e.index, self.sw(e.index, scope), scope)
            return f"_bit({val}, {self.pos_code(net, idx)}, {net.width})"
        if not 0 <= pos < net.width:
            return "0"
        return f"(({self.read(slot, 1 << pos)} >> {pos}) & 1)"

    def slice_pos(self, e: A.Slice, net: _Net, scope):
        """(constant low position or None, low position code, width)."""
        if e.mode == ":":
            a, b = self.const(e.msb, scope), self.const(e.lsb, scope)
            pa, pb = self.pos_const(net, a), self.pos_const(net, b)
            lo, hi = min(pa, pb), max(pa, pb)
            return lo, str(lo), hi - lo + 1
        w = self.const(e.lsb, scope)
        if w < 1:
            raise ElaborationError(f"{scope.module.name}: part-select width must be positive")
        try:
            base = const_eval(e.msb, scope.params)
            code = None
        except NotConstant:
            base = None
            code = self.expr(e.msb, self.sw(e.msb, scope), scope)
        descending = net.msb >= net.lsb
        if e.mode == "+:":
            if descending:
                lo = None if base is None else base - net.lsb
                lo_code = str(lo) if base is not None else f"({code} - {net.lsb})"
            else:
                lo = None if base is None else net.lsb - (base + w - 1)
                lo_code = str(lo) if base is not None else f"({net.lsb} - ({code} + {w - 1}))"
        else:
            if descending:
                lo = None if base is None else base - w + 1 - net.lsb
                lo_code = str(lo) if base is not None else f"({code} - {w - 1 + net.lsb})"
            else:
                lo = None if base is None else net.lsb - base
                lo_code = str(lo) if base is not None else f"({net.lsb} - {code})"
        return lo, lo_code, w

    def slice(self, e: A.Slice, scope) -> str:
        net, slot = self.base_net(e.base, scope)
        lo, lo_code, w = self.slice_pos(e, net, scope)
        if lo is not None and lo >= 0:
            val = self.read(slot, (_mask(w) << lo) & _mask(net.width))
            return f"(({val} >> {lo}) & {_mask(w)})" if lo else f"({val} & {_mask(w)})"
        val = self.read(slot, _mask(net.width))
        return f"_part({val}, {lo_code}, {w})"

    # lvalues ---------------------------------------------------------------

    def lvalue_width(self, lv, scope) -> int:
        if isinstance(lv, A.Concat):
            return sum(self.lvalue_width(p, scope) for p in lv.parts)
        if isinstance(lv, (A.Identifier, A.Index, A.Slice)):
            return self.sw(lv, scope)
        raise ElaborationError(f"{scope.module.name}: invalid assignment target")

    def target(self, slot: int, mode: str) -> str:
        if mode == "local":
            return self.local[slot]
        return f"v[{slot}]"

    def store(self, depth, slot, full_w, mode, value, lo=None, lo_code=None, w=None):
        """Write ``value`` (already masked to ``w`` bits) to slot bits [lo, lo+w)."""
        tgt = self.target(slot, mode)
        if lo is not None or lo_code is not None:
            if lo is not None:
                if lo < 0 or lo + w > full_w:
                    raise ElaborationError("constant select is outside the declared range")
                m = _mask(w) << lo
                self.writes[slot] = self.writes.get(slot, 0) | m
                keep = _mask(full_w) & ~m
                old = f"n.get({slot}, v[{slot}])" if mode == "nb" else tgt
                dst = f"n[{slot}]" if mode == "nb" else tgt
                shifted = f"({value} << {lo})" if lo else value
                self.emit(depth, f"{dst} = ({old} & {keep}) | {shifted}")
                return
            p = self.fresh("p")
            self.writes[slot] = self.writes.get(slot, 0) | _mask(full_w)
            self.emit(depth, f"{p} = {lo_code}")
            self.emit(depth, f"if 0 <= {p} <= {full_w - w}:")
            old = f"n.get({slot}, v[{slot}])" if mode == "nb" else tgt
            dst = f"n[{slot}]" if mode == "nb" else tgt
            self.emit(depth + 1, f"{dst} = ({old} & ~({_mask(w)} << {p}) & {_mask(full_w)})"
                                 f" | ({value} << {p})")
            return
        self.writes[slot] = self.writes.get(slot, 0) | _mask(full_w)
        dst = f"n[{slot}]" if mode == "nb" else tgt
        self.emit(depth, f"{dst} = {value}")

    def assign(self, depth, lv, value: str, scope, mode):
        """Store a value already masked to the lvalue width."""
        if isinstance(lv, A.Concat):
            tmp = self.fresh()
            self.emit(depth, f"{tmp} = {value}")
            offset = 0
            for part in reversed(lv.parts):
                w = self.lvalue_width(part, scope)
                piece = f"(({tmp} >> {offset}) & {_mask(w)})" if offset else f"({tmp} & {_mask(w)})"
                self.assign(depth, part, piece, scope, mode)
                offset += w
            return
        if isinstance(lv, A.Identifier):
            net, slot = self.net(scope, lv.name)
            self.store(depth, slot, net.width, self.mode_for(slot, mode), value)
            return
        if isinstance(lv, A.Index):
            net, slot = self.base_net(lv.base, scope)
            mode = self.mode_for(slot, mode)
            try:
                pos = self.pos_const(net, const_eval(lv.index, scope.params))
            except NotConstant:
                idx = self.expr(lv.index, self.sw(lv.index, scope), scope)
                self.store(depth, slot, net.width, mode, value, lo_code=self.pos_code(net, idx), w=1)
                return
            if 0 <= pos < net.width:
                self.store(depth, slot, net.width, mode, value, lo=pos, w=1)
            return
        if isinstance(lv, A.Slice):
            net, slot = self.base_net(lv.base, scope)
            mode = self.mode_for(slot, mode)
            lo, lo_code, w = self.slice_pos(lv, net, scope)
            if lo is not None:
                self.store(depth, slot, net.width, mode, value, lo=lo, w=w)
            else:
                self.store(depth, slot, net.width, mode, value, lo_code=lo_code, w=w)
            return
        raise ElaborationError(f"{scope.module.name}: invalid assignment target")

    def mode_for(self, slot, mode):
        if mode == "blocking-edge":
            return "local"
        return mode

    def assignment(self, depth, lv, rhs, scope, mode):
        tw = self.lvalue_width(lv, scope)
        W = max(tw, self.sw(rhs, scope))
        code = self.expr(rhs, W, scope)
        if W > tw:
            code = f"({code} & {_mask(tw)})"
        self.assign(depth, lv, code, scope, mode)

    # statements ----------------------------------------------------------

    def stmt(self, depth, s, scope, edge: bool):
        start = len(self.lines)
        self._stmt(depth, s, scope, edge)
        if len(self.lines) == start:
            self.emit(depth, "pass")

    def _stmt(self, depth, s, scope, edge):
        if s is None or isinstance(s, A.NullStmt):
            return
        if isinstance(s, A.Block):
            for x in s.stmts:
                self._stmt(depth, x, scope, edge)
            return
        if isinstance(s, A.Assign):
            if edge:
                mode = "blocking-edge" if s.blocking else "nb"
            else:
                mode = "v"
            self.assignment(depth, s.target, s.value, scope, mode)
            return
        if isinstance(s, A.If):
            c = self.expr(s.cond, self.sw(s.cond, scope), scope)
            self.emit(depth, f"if {c}:")
            self.stmt(depth + 1, s.then, scope, edge)
            if s.other is not None:
                self.emit(depth, "else:")
                self.stmt(depth + 1, s.other, scope, edge)
            return
        if isinstance(s, A.Case):
            self.case(depth, s, scope, edge)
            return
        if isinstance(s, A.Delay):
            self.ctx.ignored(s.span, "delay ignored by the cycle simulator")
            self._stmt(depth, s.stmt, scope, edge)
            return
        if isinstance(s, A.TaskCall):
            return
        raise ElaborationError(f"{scope.module.name}: cannot simulate {type(s).__name__}")

    def case(self, depth, s: A.Case, scope, edge):
        labels = [lab for arm in s.arms for lab in arm.labels]
        cw = max([self.sw(s.expr, scope)] + [self.sw(lab, scope) for lab in labels])
        sel = self.fresh("c")
        self.emit(depth, f"{sel} = {self.expr(s.expr, cw, scope)}")
        first = True
        for arm in s.arms:
            tests = []
            for lab in arm.labels:
                if (s.kind in ("casez", "casex") and isinstance(lab, A.Number)
                        and lab.literal.xz_mask):
                    care = _mask(cw) & ~lab.literal.xz_mask
                    tests.append(f"({sel} & {care}) == {lab.literal.value & care}")
                else:
                    tests.append(f"{sel} == {self.expr(lab, cw, scope)}")
            self.emit(depth, f"{'if' if first else 'elif'} {' or '.join(tests)}:")
            self.stmt(depth + 1, arm.body, scope, edge)
            first = False
        if s.default is not None:
            if first:
                self._stmt(depth, s.default, scope, edge)
            else:
                self.emit(depth, "else:")
                self.stmt(depth + 1, s.default, scope, edge)


def _blocking_targets(stmt) -> list:
    out = []
    for node in stmt.walk():
        if isinstance(node, A.Assign) and node.blocking:
            stack = [node.target]
            while stack:
                t = stack.pop()
                if isinstance(t, A.Concat):
                    stack.extend(t.parts)
                elif isinstance(t, (A.Index, A.Slice)):
                    stack.append(t.base)
                elif isinstance(t, A.Identifier):
                    out.append(t.name)
    return out


class _Context:
    def __init__(self, uf: _UnionFind, slots: dict):
        self.uf = uf
        self.slots = slots
        self.warnings: list = []
        self._four_state = False

    def slot_of(self, net: _Net) -> int:
        return self.slots[self.uf.find(net.node)]

    def four_state(self, e):
        if not self._four_state:
            self._four_state = True
            span = e.span or Span("<design>", 0, 0, 1, 1, 1, 1)
            self.warnings.append(make("SIM002", span, "x/z bits are simulated as 0"))

    def ignored(self, span, message):
        span = span or Span("<design>", 0, 0, 1, 1, 1, 1)
        self.warnings.append(make("SIM003", span, message))


def _overlap(w: Mapping, r: Mapping) -> bool:
    return any(r.get(s, 0) & m for s, m in w.items())


def _schedule(procs: list, name_of) -> list:
    """Topological order of combinational processes (stable by index)."""
    n = len(procs)
    succ = [[] for _ in range(n)]
    indeg = [0] * n
    by_slot: dict[int, list[int]] = {}
    for j, q in enumerate(procs):
        for s in q.reads:
            by_slot.setdefault(s, []).append(j)
    for i, p in enumerate(procs):
        seen = set()
        for s, m in p.writes.items():
            for j in by_slot.get(s, ()):
                if j != i and j not in seen and procs[j].reads[s] & m:
                    seen.add(j)
                    succ[i].append(j)
                    indeg[j] += 1
    ready = [i for i in range(n) if indeg[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        i = heapq.heappop(ready)
        order.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(ready, j)
    if len(order) < n:
        left = [procs[i] for i in range(n) if indeg[i] > 0]
        slots = set()
        for p in left:
            for q in left:
                if p is not q:
                    slots.update(s for s, m in p.writes.items() if q.reads.get(s, 0) & m)
        names = sorted(name_of(s) for s in slots)
        raise ElaborationError("combinational cycle through " + ", ".join(names))
    return [procs[i] for i in order]


def elaborate(asts, top: str, clock: str = "clk", reset: Optional[str] = "rstn",
              reset_active_low: bool = True) -> ElaboratedDesign:
    """Flatten the hierarchy under ``top`` and compile it for simulation.

    ``asts`` is an Ast or an iterable of them.  A reset name that is not a
    top-level input is ignored.
    """
    if isinstance(asts, A.Ast):
        asts = [asts]
    modules: dict[str, A.ModuleDecl] = {}
    for tree in asts:
        if any(d.is_error for d in tree.diagnostics):
            raise ElaborationError("sources have errors; fix them before simulating")
        for m in tree.modules:
            if m.name in modules:
                raise ElaborationError(f"module {m.name} is defined more than once")
            modules[m.name] = m
    if top not in modules:
        raise ElaborationError(f"top module {top} not found")

    fl = _Flattener(modules)
    root = fl.instantiate(modules[top], "", {}, (top,))
    slots: dict[int, int] = {}
    for _, scope, local in fl.names:
        r = fl.uf.find(scope.nets[local].node)
        if r not in slots:
            slots[r] = len(slots)
    ctx = _Context(fl.uf, slots)
    width = [0] * len(slots)
    for _, scope, local in fl.names:
        width[ctx.slot_of(scope.nets[local])] = scope.nets[local].width

    comb: list[Process] = []
    edge: list[Process] = []
    top_mod = modules[top]
    inputs = tuple(p.name for p in top_mod.ports if p.direction == "input")
    outputs = tuple(p.name for p in top_mod.ports if p.direction != "input")
    clock_slot = ctx.slot_of(root.nets[clock]) if clock in inputs else None
    reset_name = reset if reset in inputs else None

    def finish(gen: _Gen, name, kind, body_lines):
        comb_or_edge = comb if kind == "comb" else edge
        comb_or_edge.append(Process(name, kind, MappingProxyType(dict(gen.reads)),
                                    MappingProxyType(dict(gen.writes)), "\n".join(body_lines)))

    tag = 0
    for scope in fl.scopes:
        mod = scope.module
        where = scope.prefix.rstrip(".") or top
        for k, it in enumerate(mod.items):
            tag += 1
            line = it.span.line if it.span else k
            if isinstance(it, A.ContinuousAssign):
                if it.delay is not None:
                    ctx.ignored(it.span, "delay ignored by the cycle simulator")
                g = _Gen(ctx, str(tag))
                g.assignment(1, it.target, it.value, scope, "v")
                finish(g, f"{where}:assign@{line}", "comb", g.lines)
            elif isinstance(it, A.AlwaysBlock):
                g = _Gen(ctx, str(tag))
                if it.sensitivity is None:
                    raise ElaborationError(f"{mod.name}: always block without an event control")
                if it.is_combinational:
                    g.stmt(1, it.body, scope, edge=False)
                    finish(g, f"{where}:always@{line}", "comb", g.lines)
                    continue
                _check_clocking(it, scope, ctx, clock, clock_slot, mod)
                locals_ = []
                for name in dict.fromkeys(_blocking_targets(it.body)):
                    net = scope.nets.get(name)
                    if net is None:
                        raise ElaborationError(f"{mod.name}: unknown signal {name}")
                    slot = ctx.slot_of(net)
                    g.local[slot] = f"_b{tag}_{slot}"
                    locals_.append(slot)
                g.stmt(1, it.body, scope, edge=True)
                pre = [f"    _b{tag}_{s} = v[{s}]" for s in locals_]
                post = [f"    if _b{tag}_{s} != v[{s}]: n[{s}] = _b{tag}_{s}" for s in locals_]
                for s in locals_:
                    g.writes[s] = g.writes.get(s, 0) | _mask(width[s])
                finish(g, f"{where}:always@{line}", "edge", pre + g.lines + post)
            elif isinstance(it, A.InitialBlock):
                ctx.ignored(it.span, "initial block ignored by the cycle simulator")

    for scope, name, expr, span in fl.net_assigns:
        tag += 1
        g = _Gen(ctx, str(tag))
        g.assignment(1, A.Identifier(name), expr, scope, "v")
        line = span.line if span else 0
        finish(g, f"{scope.prefix.rstrip('.') or top}:{name}@{line}", "comb", g.lines)

    for direction, cscope, port, pscope, expr in fl.glue:
        tag += 1
        g = _Gen(ctx, str(tag))
        name = f"{cscope.prefix.rstrip('.')}.{port}"
        if direction == "input":
            tw = cscope.nets[port].width
            W = max(tw, g.sw(expr, pscope))
            code = g.expr(expr, W, pscope)
            if W > tw:
                code = f"({code} & {_mask(tw)})"
            g.assign(1, A.Identifier(port), code, cscope, "v")
        else:
            tw = g.lvalue_width(expr, pscope)
            W = max(tw, cscope.nets[port].width)
            code = g.expr(A.Identifier(port), W, cscope)
            if W > tw:
                code = f"({code} & {_mask(tw)})"
            g.assign(1, expr, code, pscope, "v")
        finish(g, f"{name}:port", "comb", g.lines)

    canon: dict[int, str] = {}
    for full, scope, local in fl.names:
        canon.setdefault(ctx.slot_of(scope.nets[local]), full)
    ordered = _schedule(comb, canon.__getitem__)

    init = [0] * len(slots)
    for scope, name, e in fl.inits:
        try:
            v = const_eval(e, scope.params)
        except NotConstant:
            raise ElaborationError(f"{scope.module.name}: initializer of {name} is not constant")
        net = scope.nets[name]
        init[ctx.slot_of(net)] = v & _mask(net.width)

    state_slots = {s for p in edge for s in p.writes}
    input_slots = {ctx.slot_of(root.nets[n]) for n in inputs}
    signals = {}
    for full, scope, local in fl.names:
        net = scope.nets[local]
        slot = ctx.slot_of(net)
        kind = ("input" if slot in input_slots else
                "state" if slot in state_slots else "combinational")
        signals[full] = SignalInfo(full, slot, net.width, net.msb, net.lsb, kind)

    settle_src = ["def settle(v):"] + [ln for p in ordered for ln in p.source.splitlines()]
    if len(settle_src) == 1:
        settle_src.append("    pass")
    edge_src = ["def edge(v, n):"] + [ln for p in edge for ln in p.source.splitlines()]
    if len(edge_src) == 1:
        edge_src.append("    pass")
    ns = dict(_HELPERS)
    try:
        exec(compile("\n".join(settle_src + edge_src) + "\n", f"<{top}>", "exec"), ns)
    except SyntaxError as e:      # pragma: no cover - generator bug
        raise ElaborationError(f"internal code generation error: {e}")

    return ElaboratedDesign(
        top=top, signals=MappingProxyType(signals), comb=tuple(ordered), edge=tuple(edge),
        clock=clock if clock_slot is not None else None, reset=reset_name,
        reset_active_low=reset_active_low, inputs=inputs, outputs=outputs, init=tuple(init),
        warnings=tuple(ctx.warnings), settle_fn=ns["settle"], edge_fn=ns["edge"])


def _check_clocking(blk: A.AlwaysBlock, scope, ctx, clock, clock_slot, mod):
    on_clock = []
    for ev in blk.edges:
        if not isinstance(ev.signal, A.Identifier) or ev.signal.name not in scope.nets:
            raise ElaborationError(f"{mod.name}: edge event on something other than a signal")
        if clock_slot is not None and ctx.slot_of(scope.nets[ev.signal.name]) == clock_slot:
            on_clock.append(ev)
    if clock_slot is None:
        raise ElaborationError(f"{mod.name}: clocked logic needs top-level input {clock}")
    if not on_clock:
        names = ", ".join(e.signal.name for e in blk.edges)
        raise ElaborationError(f"{mod.name}: always block clocked by {names}, not {clock}; "
                               "only a single clock is supported")
    if any(e.polarity == "negedge" for e in on_clock):
        raise ElaborationError(f"{mod.name}: negative-edge clocking is not supported")
