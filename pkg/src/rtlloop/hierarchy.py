"""Design manifests and hierarchy conformance checks.

A manifest is the designer's contract for a generated design: which
modules exist, their ports, which instances each one contains, and the
clock/reset conventions shared by all of them.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .diagnostics import Span, has_errors, make, sort_diagnostics
from .frontend import ast as A
from .frontend.consteval import NotConstant, module_params, range_width

DIRECTIONS = ("input", "output", "inout")


class ManifestError(ValueError):
    """Malformed or inconsistent manifest."""


@dataclass(frozen=True)
class PortSpec:
    name: str
    direction: str
    width: int = 1


@dataclass(frozen=True)
class InstanceSpec:
    module: str
    instance: str


@dataclass(frozen=True)
class ModuleSpec:
    name: str
    ports: tuple = ()
    children: tuple = ()
    description: str = ""
    frequency_mhz: Optional[float] = None     # accepted, not checked

    def port(self, name: str) -> Optional[PortSpec]:
        for p in self.ports:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class ClockSpec:
    name: str
    frequency_mhz: Optional[float] = None


@dataclass(frozen=True)
class ResetSpec:
    name: str
    active_low: bool = True
    is_async: bool = True


@dataclass(frozen=True)
class DesignManifest:
    top: str
    modules: tuple
    clock: ClockSpec
    reset: Optional[ResetSpec] = None
    source: str = "<manifest>"

    def module(self, name: str) -> ModuleSpec:
        for m in self.modules:
            if m.name == name:
                return m
        raise KeyError(name)

    def names(self) -> list:
        return [m.name for m in self.modules]

    def build_order(self) -> list:
        """Module names reachable from the top, children before parents."""
        order: list[str] = []

        def visit(name):
            if name in order:
                return
            for c in self.module(name).children:
                visit(c.module)
            order.append(name)

        visit(self.top)
        for m in self.modules:           # unreachable modules last
            visit(m.name)
        return order


def _need(obj, key, kind, where):
    if not isinstance(obj, dict) or key not in obj:
        raise ManifestError(f"{where}: missing field {key!r}")
    v = obj[key]
    if kind is int:
        ok = isinstance(v, int) and not isinstance(v, bool)
    else:
        ok = isinstance(v, kind)
    if not ok:
        raise ManifestError(f"{where}: field {key!r} must be {getattr(kind, '__name__', kind)}")
    return v


def _frequency(obj, where):
    f = obj.get("frequency_mhz") if isinstance(obj, dict) else None
    if f is not None and (isinstance(f, bool) or not isinstance(f, (int, float)) or f <= 0):
        raise ManifestError(f"{where}: frequency_mhz must be a positive number")
    return f


def manifest_from_json(obj, source: str = "<manifest>") -> DesignManifest:
    if not isinstance(obj, dict):
        raise ManifestError("manifest must be a JSON object")
    top = _need(obj, "top", str, "manifest")
    clk = _need(obj, "clock", dict, "manifest")
    clock = ClockSpec(_need(clk, "name", str, "clock"), _frequency(clk, "clock"))
    reset = None
    if obj.get("reset") is not None:
        r = _need(obj, "reset", dict, "manifest")
        active = r.get("active", "low")
        if active not in ("low", "high"):
            raise ManifestError("reset: active must be 'low' or 'high'")
        is_async = r.get("async", True)
        if not isinstance(is_async, bool):
            raise ManifestError("reset: async must be true or false")
        reset = ResetSpec(_need(r, "name", str, "reset"), active == "low", is_async)

    modules = []
    for k, m in enumerate(_need(obj, "modules", list, "manifest")):
        where = f"modules[{k}]"
        name = _need(m, "name", str, where)
        where = f"module {name}"
        ports = []
        for j, p in enumerate(m.get("ports", [])):
            pw = f"{where} port {j}"
            pname = _need(p, "name", str, pw)
            direction = _need(p, "dir", str, pw)
            if direction not in DIRECTIONS:
                raise ManifestError(f"{where} port {pname}: dir must be one of {DIRECTIONS}")
            width = p.get("width", 1)
            if isinstance(width, bool) or not isinstance(width, int) or width < 1:
                raise ManifestError(f"{where} port {pname}: width must be a positive integer")
            ports.append(PortSpec(pname, direction, width))
        dup = [n for n, c in Counter(p.name for p in ports).items() if c > 1]
        if dup:
            raise ManifestError(f"{where}: duplicate port {dup[0]}")
        children = []
        for j, c in enumerate(m.get("children", [])):
            cw = f"{where} child {j}"
            children.append(InstanceSpec(_need(c, "module", str, cw), _need(c, "instance", str, cw)))
        dup = [n for n, c in Counter(c.instance for c in children).items() if c > 1]
        if dup:
            raise ManifestError(f"{where}: duplicate instance {dup[0]}")
        desc = m.get("description", "")
        if not isinstance(desc, str):
            raise ManifestError(f"{where}: description must be a string")
        modules.append(ModuleSpec(name, tuple(ports), tuple(children), desc,
                                  _frequency(m, where)))

    names = [m.name for m in modules]
    dup = [n for n, c in Counter(names).items() if c > 1]
    if dup:
        raise ManifestError(f"duplicate module {dup[0]}")
    if top not in names:
        raise ManifestError(f"top module {top} is not declared")
    for m in modules:
        for c in m.children:
            if c.module not in names:
                raise ManifestError(f"module {m.name}: child {c.instance} refers to unknown "
                                    f"module {c.module}")
    _check_acyclic(modules)
    return DesignManifest(top, tuple(modules), clock, reset, source)


def _check_acyclic(modules):
    graph = {m.name: [c.module for c in m.children] for m in modules}
    state: dict[str, int] = {}

    def visit(n, path):
        state[n] = 1
        for c in graph[n]:
            if state.get(c) == 1:
                cycle = path[path.index(c):] + [c]
                raise ManifestError("instantiation cycle: " + " -> ".join(cycle))
            if c not in state:
                visit(c, path + [c])
        state[n] = 2

    for n in graph:
        if n not in state:
            visit(n, [n])


def load_manifest(data: bytes, source: str = "<manifest>") -> DesignManifest:
    """Parse and validate a manifest document."""
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as e:
        raise ManifestError(f"{source}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}") from e
    except UnicodeDecodeError as e:
        raise ManifestError(f"{source}: not UTF-8 text") from e
    return manifest_from_json(obj, source)


# -- conformance ----------------------------------------------------------------

@dataclass
class HierReport:
    diagnostics: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not has_errors(self.diagnostics)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def codes(self) -> list:
        return [d.rule for d in self.diagnostics]

    def as_json(self) -> dict:
        return {"verdict": self.verdict,
                "diagnostics": [d.as_json() for d in self.diagnostics]}


def _source_width(mod: A.ModuleDecl, port: A.PortDecl) -> Optional[int]:
    try:
        return range_width(port.range, module_params(mod))
    except (NotConstant, RecursionError):
        return None


def _check_ports(spec: ModuleSpec, mod: A.ModuleDecl, out: list):
    src = {p.name: p for p in mod.ports}
    missing = [p for p in spec.ports if p.name not in src]
    extra = [p for p in mod.ports if spec.port(p.name) is None]
    for p in spec.ports:
        sp = src.get(p.name)
        if sp is None:
            continue
        if sp.direction != p.direction:
            out.append(make("HC002", sp.span, f"{mod.name}: port {p.name} is {sp.direction}, "
                            f"manifest says {p.direction}",
                            hint=f"declare {p.name} as {p.direction}"))
        w = _source_width(mod, sp)
        if w != p.width:
            got = "not constant" if w is None else f"{w} bits"
            out.append(make("HC002", sp.span, f"{mod.name}: port {p.name} is {got}, manifest "
                            f"says {p.width} bits",
                            hint=f"declare {p.name} with width {p.width}"))
    # a missing and an extra port at the same position read as one rename
    for want, got in zip(missing, extra):
        out.append(make("HC002", got.span, f"{mod.name}: port {want.name} is missing; found "
                        f"{got.name} instead", hint=f"rename {got.name} to {want.name}"))
    for want in missing[len(extra):]:
        out.append(make("HC002", mod.span, f"{mod.name}: port {want.name} is missing",
                        hint=f"add {want.direction} {want.name} ({want.width} bits)"))
    for got in extra[len(missing):]:
        out.append(make("HC002", got.span, f"{mod.name}: port {got.name} is not in the manifest",
                        hint=f"remove {got.name} or add it to the manifest"))


def _check_children(spec: ModuleSpec, mod: A.ModuleDecl, out: list):
    want = Counter((c.module, c.instance) for c in spec.children)
    insts = mod.items_of(A.Instantiation)
    have = Counter((i.module, i.name) for i in insts)
    for (m, name), n in sorted((want - have).items()):
        for _ in range(n):
            out.append(make("HC003", mod.span, f"{mod.name}: missing instance {name} of {m}",
                            hint=f"instantiate {m} as {name}"))
    seen: Counter = Counter()
    for inst in insts:
        key = (inst.module, inst.name)
        seen[key] += 1
        if seen[key] > want.get(key, 0):
            what = "duplicate" if want.get(key) else "unexpected"
            out.append(make("HC003", inst.span, f"{mod.name}: {what} instance {inst.name} "
                            f"of {inst.module}",
                            hint="keep exactly the instances listed in the manifest"))


def _check_clocking(manifest: DesignManifest, mod: A.ModuleDecl, out: list):
    clk = manifest.clock.name
    rst = manifest.reset
    for blk in mod.items_of(A.AlwaysBlock):
        before = len(out)
        for ev in blk.edges:
            name = ev.signal.name if isinstance(ev.signal, A.Identifier) else None
            if name == clk:
                if ev.polarity != "posedge":
                    out.append(make("HC005", ev.span, f"{mod.name}: {clk} is used on its "
                                    f"falling edge", hint=f"use posedge {clk}"))
                continue
            if rst is not None and name == rst.name:
                want = "negedge" if rst.active_low else "posedge"
                if not rst.is_async:
                    out.append(make("HC005", ev.span, f"{mod.name}: {rst.name} is a synchronous "
                                    "reset and must not appear in the event list",
                                    hint=f"sample {rst.name} inside the clocked block"))
                elif ev.polarity != want:
                    out.append(make("HC005", ev.span, f"{mod.name}: {rst.name} is active "
                                    f"{'low' if rst.active_low else 'high'}; use {want}",
                                    hint=f"write {want} {rst.name}"))
                continue
            expected = f"posedge {clk}" + (f" and the {rst.name} reset" if rst else "")
            out.append(make("HC005", ev.span, f"{mod.name}: edge event on {name or 'an expression'}"
                            f" does not match the design's clock/reset ({expected})",
                            hint=f"clock with posedge {clk}"
                                 + (f" and reset with {rst.name}" if rst else "")))
        if blk.edges and not any(isinstance(e.signal, A.Identifier) and e.signal.name == clk
                                 for e in blk.edges):
            if len(out) == before:
                out.append(make("HC005", blk.span, f"{mod.name}: clocked block does not use "
                                f"{clk}", hint=f"clock with posedge {clk}"))


def check(manifest: DesignManifest, asts: Iterable[A.Ast], only: Iterable[str] = None) -> HierReport:
    """Compare parsed sources against ``manifest``.

    ``only`` restricts the per-module checks to the named manifest modules,
    for checking one generated module at a time.
    """
    only = None if only is None else set(only)
    if isinstance(asts, A.Ast):
        asts = [asts]
    sources: dict[str, A.ModuleDecl] = {}
    broken: set[str] = set()
    for tree in asts:
        for m in tree.modules:
            if m.has_errors:
                broken.add(m.name)
            elif m.name not in sources:
                sources[m.name] = m
    nowhere = Span(manifest.source, 0, 0, 1, 1, 1, 1)
    out: list = []
    for spec in manifest.modules:
        if only is not None and spec.name not in only:
            continue
        mod = sources.get(spec.name)
        if mod is None:
            why = "has syntax errors" if spec.name in broken else "is not defined in the sources"
            out.append(make("HC001", nowhere, f"module {spec.name} {why}",
                            hint=f"provide module {spec.name} as declared in the manifest"))
            continue
        _check_ports(spec, mod, out)
        _check_children(spec, mod, out)
        _check_clocking(manifest, mod, out)
    declared = set(manifest.names())
    for name, mod in sources.items():
        if name not in declared:
            out.append(make("HC004", mod.span, f"module {name} is not in the manifest",
                            hint="remove the module or add it to the manifest"))
    return HierReport(sort_diagnostics(out))
