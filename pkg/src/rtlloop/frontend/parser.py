"""Recursive-descent parser with panic-mode error recovery.

Malformed regions produce SYN000 diagnostics that record the expected and
found token; the parser then skips to a synchronization point (``;`` or one
of the block keywords) and carries on, so later well-formed modules are never
lost.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from ..diagnostics import Diagnostic, make
from . import ast as A
from .preprocess import defines_from_strings, preprocess
from .tokens import (EOF, ERRTOK, IDENT, KEYWORD, MACRO, OPERATOR, PUNCT, SIZED, STRING,
                     UNSIZED, Token, tokenize)

MAX_DIAGNOSTICS = 10_000

BINARY_PREC = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "~^": 4, "^~": 4, "&": 5,
    "==": 6, "!=": 6, "===": 6, "!==": 6,
    "<": 7, "<=": 7, ">": 7, ">=": 7,
    "<<": 8, ">>": 8, "<<<": 8, ">>>": 8,
    "+": 9, "-": 9, "*": 10, "/": 10, "%": 10, "**": 11,
}
UNARY_OPS = {"+", "-", "!", "~", "&", "|", "^", "~&", "~|", "~^", "^~"}

# Keywords that end a statement region; the enclosing construct handles them.
SYNC_KEYWORDS = {"end", "endcase", "endmodule", "always", "assign", "initial", "module"}
ITEM_KEYWORDS = {"always", "assign", "initial", "wire", "reg", "integer", "input",
                 "output", "inout", "parameter", "localparam", "endmodule", "module",
                 "genvar", "generate", "function", "task"}
_UNSUPPORTED_ITEMS = {"generate": "endgenerate", "function": "endfunction",
                      "task": "endtask"}


class _Panic(Exception):
    pass


class _Flood(Exception):
    pass


@dataclass
class ParseResult:
    ast: A.Ast
    diagnostics: list
    macros: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not any(d.is_error for d in self.diagnostics)


def _describe(tok: Token) -> str:
    return "end of input" if tok.kind == EOF else tok.text


class Parser:
    def __init__(self, tokens: Sequence[Token]):
        toks = list(tokens)
        if not toks or toks[-1].kind != EOF:
            raise ValueError("token list must end with an eof token")
        self.toks = toks
        self.pos = 0
        self.diags: list[Diagnostic] = []
        self.begin_depth = 0

    # -- token helpers ---------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    @property
    def prev(self) -> Token:
        return self.toks[max(self.pos - 1, 0)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in (KEYWORD, OPERATOR, PUNCT) and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        if t.kind != EOF:
            self.pos += 1
        return t

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            return self.advance()
        return None

    def error(self, message, tok=None, expected=None, hint=None, severity=None):
        tok = tok or self.tok
        if len(self.diags) >= MAX_DIAGNOSTICS - 1:
            self.diags.append(make("SYN999", tok.span, "diagnostic flood",
                                   hint="too many errors; parsing stopped"))
            raise _Flood()
        found = _describe(tok)
        if hint is None and expected is not None:
            hint = f"expected {expected!r} here but found {found!r}"
        self.diags.append(make("SYN000", tok.span, message, hint=hint, severity=severity,
                               expected=expected, found=found))

    def expect(self, text: str, what: str = None) -> Token:
        if self.at(text):
            return self.advance()
        self.error(f"expected '{text}'{' ' + what if what else ''}, found '{_describe(self.tok)}'",
                   expected=text)
        raise _Panic()

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind == IDENT:
            return self.advance()
        self.error(f"expected {what}, found '{_describe(self.tok)}'", expected=what)
        raise _Panic()

    def span_from(self, start: Token):
        end = self.prev if self.pos > 0 else start
        if end.span.end < start.span.start:
            end = start
        return start.span.to(end.span)

    def synchronize(self, stop=SYNC_KEYWORDS):
        """Skip to just past a ';' or up to a synchronization keyword."""
        while True:
            t = self.tok
            if t.kind == EOF:
                return
            if t.kind == KEYWORD and t.text in stop:
                return
            self.advance()
            if t.kind == PUNCT and t.text == ";":
                while self.at(";"):
                    self.advance()
                return

    # -- top level ---------------------------------------------------------

    def parse(self) -> A.Ast:
        start = self.tok
        modules = []
        try:
            while self.tok.kind != EOF:
                if self.at("module"):
                    modules.append(self.parse_module())
                    continue
                self.error(f"expected 'module', found '{_describe(self.tok)}'", expected="module",
                           hint="code must be inside module ... endmodule")
                self.advance()
                while self.tok.kind != EOF and not self.at("module"):
                    self.advance()
        except _Flood:
            pass
        return A.Ast(modules, span=self.span_from(start), diagnostics=self.diags)

    def parse_module(self) -> A.ModuleDecl:
        start = self.advance()
        n_diags = len(self.diags)
        params, ports, items = [], [], []
        name = "<error>"
        header_names: list[str] = []
        try:
            name = self.ident("module name").text
            if self.accept("#"):
                params = self.parse_param_ports()
            if self.accept("("):
                ports, header_names = self.parse_port_list()
            self.expect(";", "after module header")
        except _Panic:
            self.synchronize(ITEM_KEYWORDS | SYNC_KEYWORDS)

        body_ports: dict[str, A.PortDecl] = {}
        while True:
            if self.at("endmodule"):
                self.advance()
                break
            if self.tok.kind == EOF or self.at("module"):
                self.error(f"expected 'endmodule', found '{_describe(self.tok)}'",
                           expected="endmodule", hint=f"close module {name} with endmodule")
                break
            before = self.pos
            try:
                self.parse_item(items, body_ports)
            except _Panic:
                self.synchronize(ITEM_KEYWORDS | SYNC_KEYWORDS - {"end", "endcase"})
                if self.pos == before:
                    self.advance()
        ports = self._merge_ports(ports, header_names, body_ports, items)
        mod = A.ModuleDecl(name, params, ports, items, span=self.span_from(start))
        mod.has_errors = any(d.is_error for d in self.diags[n_diags:])
        return mod

    def _merge_ports(self, ports, header_names, body_ports, items):
        if header_names:
            merged = []
            for tok in header_names:
                decl = body_ports.get(tok.text)
                if decl is None:
                    self.error(f"port '{tok.text}' has no direction declaration", tok,
                               hint=f"declare it, e.g. 'input {tok.text};'")
                    decl = A.PortDecl(tok.text, "input", span=tok.span)
                merged.append(decl)
            ports = merged
        elif body_ports:
            for d in body_ports.values():
                self.error(f"'{d.name}' is declared as a port but missing from the header",
                           hint="list every port in the module header")
        # fold `reg x;` redeclarations of ports into the port itself
        by_name = {p.name: p for p in ports}
        for item in list(items):
            if isinstance(item, A.NetDecl) and item.kind == "reg":
                keep = []
                for nm, init in zip(item.names, item.inits):
                    p = by_name.get(nm)
                    if p is not None and p.direction == "output" and init is None:
                        p.kind = "reg"
                        if p.range is None:
                            p.range = item.range
                    else:
                        keep.append((nm, init))
                if not keep:
                    items.remove(item)
                elif len(keep) != len(item.names):
                    item.names = [k[0] for k in keep]
                    item.inits = [k[1] for k in keep]
        return ports

    def parse_param_ports(self) -> list:
        self.expect("(")
        params = []
        local = False
        while not self.at(")"):
            if self.accept("parameter"):
                local = False
            elif self.accept("localparam"):
                local = True
            params.append(self.parse_param_assign(local))
            if not self.accept(","):
                break
        self.expect(")")
        return params

    def parse_param_assign(self, local: bool, rng=None) -> A.ParamDecl:
        if self.accept("integer"):
            pass
        if rng is None and self.at("["):
            rng = self.parse_range()
        name = self.ident("parameter name")
        self.expect("=")
        value = self.parse_expr()
        return A.ParamDecl(name.text, value, local, rng, span=self.span_from(name))

    def parse_port_list(self):
        ports, names = [], []
        if self.accept(")"):
            return ports, names
        if not self.at("input", "output", "inout"):
            # non-ANSI header: bare names, directions come from the body
            while True:
                names.append(self.ident("port name"))
                if not self.accept(","):
                    break
            self.expect(")")
            return ports, names
        direction, kind, rng, signed = None, "wire", None, False
        while True:
            start = self.tok
            if self.at("input", "output", "inout"):
                direction = self.advance().text
                kind, rng, signed = "wire", None, False
                if self.at("wire", "reg"):
                    kind = self.advance().text
                if self.accept("signed"):
                    signed = True
                if self.at("["):
                    rng = self.parse_range()
            name = self.ident("port name")
            ports.append(A.PortDecl(name.text, direction, kind, rng, signed,
                                    span=self.span_from(start)))
            if not self.accept(","):
                break
        self.expect(")", "to close the port list")
        return ports, names

    def parse_range(self) -> A.Range:
        start = self.expect("[")
        msb = self.parse_expr()
        self.expect(":")
        lsb = self.parse_expr()
        self.expect("]")
        return A.Range(msb, lsb, span=self.span_from(start))

    # -- module items --------------------------------------------------------

    def parse_item(self, items: list, body_ports: dict):
        t = self.tok
        if t.kind == KEYWORD:
            kw = t.text
            if kw in ("input", "output", "inout"):
                self.parse_body_port_decl(body_ports)
            elif kw in ("wire", "reg", "integer", "tri", "supply0", "supply1"):
                items.append(self.parse_net_decl())
            elif kw in ("parameter", "localparam"):
                self.advance()
                rng = self.parse_range() if self.at("[") else None
                while True:
                    items.append(self.parse_param_assign(kw == "localparam", rng))
                    if not self.accept(","):
                        break
                self.expect(";")
            elif kw == "assign":
                self.advance()
                delay = None
                if self.accept("#"):
                    delay = self.parse_primary()
                while True:
                    s = self.tok
                    target = self.parse_lvalue()
                    self.expect("=")
                    value = self.parse_expr()
                    items.append(A.ContinuousAssign(target, value, delay, span=self.span_from(s)))
                    if not self.accept(","):
                        break
                self.expect(";")
            elif kw == "always":
                items.append(self.parse_always())
            elif kw == "initial":
                self.advance()
                body = self.parse_statement()
                items.append(A.InitialBlock(body, span=self.span_from(t)))
            elif kw in _UNSUPPORTED_ITEMS:
                self.advance()
                self.error(f"unsupported construct '{kw}'", t,
                           hint=f"rewrite without {kw}; the supported subset is plain RTL")
                closing = _UNSUPPORTED_ITEMS[kw]
                while self.tok.kind != EOF and not self.at(closing, "endmodule"):
                    self.advance()
                self.accept(closing)
            elif kw == "genvar":
                self.advance()
                self.error("unsupported construct 'genvar'", t)
                raise _Panic()
            else:
                self.error(f"unexpected '{kw}' in module body", t,
                           hint="expected a declaration, assign, always block or instance")
                raise _Panic()
        elif t.kind == IDENT and self.peek().kind == IDENT or (
                t.kind == IDENT and self.peek().kind == PUNCT and self.peek().text == "#"):
            self.parse_instantiation(items)
        elif t.kind == PUNCT and t.text == "}":
            self.error("unexpected '}' in module body", t, expected="end",
                       hint="Verilog blocks are closed with 'end', not '}'")
            self.advance()
        else:
            self.error(f"unexpected '{_describe(t)}' in module body", t,
                       hint="expected a declaration, assign, always block or instance")
            raise _Panic()

    def parse_body_port_decl(self, body_ports: dict):
        start = self.advance()
        direction = start.text
        kind, signed, rng = "wire", False, None
        if self.at("wire", "reg"):
            kind = self.advance().text
        if self.accept("signed"):
            signed = True
        if self.at("["):
            rng = self.parse_range()
        while True:
            name = self.ident("port name")
            body_ports[name.text] = A.PortDecl(name.text, direction, kind, rng, signed,
                                               span=self.span_from(start))
            if not self.accept(","):
                break
        self.expect(";")

    def parse_net_decl(self) -> A.NetDecl:
        start = self.advance()
        kind = start.text
        if kind in ("tri", "supply0", "supply1"):
            kind = "wire"
        signed = bool(self.accept("signed"))
        rng = self.parse_range() if self.at("[") else None
        names, inits = [], []
        while True:
            name = self.ident("net name")
            if self.at("["):
                self.error("memory arrays are not supported", self.tok,
                           hint="use a flat vector instead of an array")
                raise _Panic()
            names.append(name.text)
            inits.append(self.parse_expr() if self.accept("=") else None)
            if not self.accept(","):
                break
        self.expect(";")
        return A.NetDecl(kind, names, rng, signed, inits, span=self.span_from(start))

    def parse_always(self) -> A.AlwaysBlock:
        start = self.advance()
        sens = None
        if self.accept("@"):
            if self.accept("*"):
                sens = "*"
            else:
                self.expect("(", "after '@'")
                if self.at("*"):
                    self.advance()
                    sens = "*"
                elif self.at(")"):
                    self.error("empty sensitivity list", self.tok, expected="*",
                               hint="use @(*) for combinational logic")
                    sens = "*"
                else:
                    sens = []
                    while True:
                        s = self.tok
                        pol = None
                        if self.at("posedge", "negedge"):
                            pol = self.advance().text
                        sig = self.parse_expr()
                        sens.append(A.EdgeEvent(pol, sig, span=self.span_from(s)))
                        if not (self.accept(",") or self.accept("or")):
                            break
                self.expect(")", "to close the sensitivity list")
        depth = self.begin_depth
        self.begin_depth = 0
        try:
            body = self.parse_statement()
        finally:
            self.begin_depth = depth
        return A.AlwaysBlock(sens, body, span=self.span_from(start))

    def parse_instantiation(self, items: list):
        start = self.advance()
        params = []
        if self.accept("#"):
            self.expect("(")
            params = self.parse_connections()
            self.expect(")")
        while True:
            inst = self.ident("instance name")
            self.expect("(", "after instance name")
            conns = self.parse_connections()
            self.expect(")", "to close the port connections")
            items.append(A.Instantiation(start.text, inst.text, params, conns,
                                         span=self.span_from(start)))
            if not self.accept(","):
                break
        self.expect(";")

    def parse_connections(self) -> list:
        conns = []
        if self.at(")"):
            return conns
        while True:
            s = self.tok
            if self.accept("."):
                name = self.ident("port name").text
                self.expect("(")
                expr = None if self.at(")") else self.parse_expr()
                self.expect(")")
                conns.append(A.Connection(name, expr, span=self.span_from(s)))
            else:
                conns.append(A.Connection(None, self.parse_expr(), span=self.span_from(s)))
            if not self.accept(","):
                break
        return conns

    # -- statements ------------------------------------------------------------

    def parse_statement(self):
        t = self.tok
        if self.at("begin"):
            return self.parse_block()
        if self.at("if"):
            self.advance()
            self.expect("(", "after 'if'")
            cond = self.parse_expr()
            self.expect(")", "to close the if condition")
            then = self.parse_statement()
            other = None
            if self.accept("else"):
                other = self.parse_statement()
            return A.If(cond, then, other, span=self.span_from(t))
        if self.at("case", "casez", "casex"):
            return self.parse_case()
        if self.at(";"):
            self.advance()
            return A.NullStmt(span=t.span)
        if self.at("#"):
            self.advance()
            amount = self.parse_primary()
            stmt = self.parse_statement()
            return A.Delay(amount, stmt, span=self.span_from(t))
        if t.kind == IDENT and t.text.startswith("$"):
            self.advance()
            args = []
            if self.accept("("):
                if not self.at(")"):
                    while True:
                        args.append(self.parse_expr())
                        if not self.accept(","):
                            break
                self.expect(")")
            self.expect(";")
            return A.TaskCall(t.text, args, span=self.span_from(t))
        if t.kind in (IDENT, MACRO) or self.at("{"):
            target = self.parse_lvalue()
            if self.accept("="):
                blocking = True
            elif self.accept("<="):
                blocking = False
            else:
                self.error(f"expected '=' or '<=', found '{_describe(self.tok)}'", expected="=")
                raise _Panic()
            if self.at("#"):
                self.advance()
                amount = self.parse_primary()
                value = self.parse_expr()
                self.expect(";")
                inner = A.Assign(target, value, blocking, span=self.span_from(t))
                return A.Delay(amount, inner, span=self.span_from(t))
            value = self.parse_expr()
            self.expect(";", "after assignment")
            return A.Assign(target, value, blocking, span=self.span_from(t))
        if self.at("}"):
            self.error("unexpected '}'", t, expected="end",
                       hint="Verilog blocks are closed with 'end', not '}'")
            raise _Panic()
        self.error(f"expected a statement, found '{_describe(t)}'", t, expected="statement")
        raise _Panic()

    def parse_block(self) -> A.Block:
        start = self.advance()
        name = None
        if self.accept(":"):
            name = self.ident("block name").text
        stmts = []
        self.begin_depth += 1
        try:
            while True:
                t = self.tok
                if self.at("end"):
                    self.advance()
                    break
                if t.kind == PUNCT and t.text == "}":
                    self.error("begin block closed with '}' instead of 'end'", t, expected="end",
                               hint="replace '}' with 'end'; Verilog does not use braces for blocks")
                    self.advance()
                    break
                if t.kind == EOF or self.at("endmodule", "endcase", "always", "assign",
                                            "initial", "module"):
                    self.error(f"'begin' block is not closed: expected 'end', found "
                               f"'{_describe(t)}'", t, expected="end",
                               hint=f"add 'end' to close the 'begin' on line {start.span.line}")
                    break
                before = self.pos
                try:
                    stmts.append(self.parse_statement())
                except _Panic:
                    self.synchronize()
                    if self.pos == before and self.at("else", "begin"):
                        self.advance()
        finally:
            self.begin_depth -= 1
        return A.Block(stmts, name, span=self.span_from(start))

    def parse_case(self) -> A.Case:
        start = self.advance()
        kind = start.text
        self.expect("(", f"after '{kind}'")
        if self.at(")"):
            self.error(f"empty {kind} expression", self.tok, expected="expression",
                       hint=f"give the {kind} statement a selector, e.g. {kind} (state)")
            expr = A.ErrorExpr(span=self.tok.span)
        else:
            try:
                expr = self.parse_expr()
            except _Panic:
                expr = A.ErrorExpr(span=self.tok.span)
                while self.tok.kind != EOF and not self.at(")", ";") and not (
                        self.tok.kind == KEYWORD and self.tok.text in SYNC_KEYWORDS):
                    self.advance()
        self.expect(")", f"to close the {kind} expression")
        arms, default = [], None
        while True:
            t = self.tok
            if self.at("endcase"):
                self.advance()
                break
            if self.at("end") or t.kind == EOF or self.at(
                    "endmodule", "always", "assign", "initial", "module", "}"):
                self.error(f"'{kind}' block is not closed: expected 'endcase', found "
                           f"'{_describe(t)}'", t, expected="endcase",
                           hint=f"close the {kind} on line {start.span.line} with 'endcase'")
                # a stray 'end' belongs to this case unless a begin is still open
                if self.at("end") and self.begin_depth == 0 or self.at("}"):
                    self.advance()
                break
            before = self.pos
            try:
                if self.at("default"):
                    self.advance()
                    self.accept(":")
                    body = self.parse_statement()
                    if default is not None:
                        self.error("duplicate default in case", t)
                    default = body
                    continue
                if self.at(";"):
                    self.error("unexpected ';' in case item list", t, expected="case item",
                               hint="remove the stray ';'")
                    self.advance()
                    continue
                labels = [self.parse_expr()]
                while self.accept(","):
                    labels.append(self.parse_expr())
                self.expect(":", "after case label")
                body = self.parse_statement()
                arms.append(A.CaseArm(labels, body, span=self.span_from(t)))
            except _Panic:
                self.synchronize()
                if self.pos == before and not self.at("end", "endcase"):
                    self.advance()
        return A.Case(kind, expr, arms, default, span=self.span_from(start))

    # -- expressions -----------------------------------------------------------

    def parse_lvalue(self):
        t = self.tok
        if self.at("{"):
            self.advance()
            parts = [self.parse_lvalue()]
            while self.accept(","):
                parts.append(self.parse_lvalue())
            self.expect("}")
            return A.Concat(parts, span=self.span_from(t))
        if t.kind == MACRO:
            self.advance()
            return A.MacroRef(t.value, span=t.span)
        name = self.ident("assignment target")
        return self.parse_selects(A.Identifier(name.text, span=name.span), name)

    def parse_selects(self, node, start: Token):
        while self.at("["):
            self.advance()
            first = self.parse_expr()
            if self.at(":", "+:", "-:"):
                mode = self.advance().text
                second = self.parse_expr()
                self.expect("]")
                node = A.Slice(node, first, second, mode, span=self.span_from(start))
            else:
                self.expect("]")
                node = A.Index(node, first, span=self.span_from(start))
        return node

    def parse_expr(self):
        start = self.tok
        cond = self.parse_binary(1)
        if self.accept("?"):
            then = self.parse_expr()
            self.expect(":", "in conditional expression")
            other = self.parse_expr()
            return A.Ternary(cond, then, other, span=self.span_from(start))
        return cond

    def parse_binary(self, min_prec: int):
        start = self.tok
        left = self.parse_unary()
        while True:
            t = self.tok
            prec = BINARY_PREC.get(t.text) if t.kind == OPERATOR else None
            if prec is None or prec < min_prec:
                return left
            self.advance()
            # ** is right associative, everything else left
            right = self.parse_binary(prec if t.text == "**" else prec + 1)
            left = A.Binary(t.text, left, right, span=self.span_from(start))

    def parse_unary(self):
        t = self.tok
        if t.kind == OPERATOR and t.text in UNARY_OPS:
            self.advance()
            operand = self.parse_unary()
            return A.Unary(t.text, operand, span=self.span_from(t))
        return self.parse_primary()

    def parse_primary(self):
        t = self.tok
        if t.kind in (SIZED, UNSIZED):
            self.advance()
            return A.Number(t.value, span=t.span)
        if t.kind == STRING:
            self.advance()
            return A.StringLit(t.text, span=t.span)
        if t.kind == MACRO:
            self.advance()
            return A.MacroRef(t.value, span=t.span)
        if t.kind == IDENT:
            self.advance()
            if t.text.startswith("$"):
                args = []
                if self.accept("("):
                    if not self.at(")"):
                        while True:
                            args.append(self.parse_expr())
                            if not self.accept(","):
                                break
                    self.expect(")")
                return A.Call(t.text, args, span=self.span_from(t))
            return self.parse_selects(A.Identifier(t.text, span=t.span), t)
        if self.at("("):
            self.advance()
            e = self.parse_expr()
            self.expect(")")
            return e
        if self.at("{"):
            self.advance()
            first = self.parse_expr()
            if self.at("{"):
                self.advance()
                parts = [self.parse_expr()]
                while self.accept(","):
                    parts.append(self.parse_expr())
                self.expect("}")
                self.expect("}")
                return A.Replicate(first, parts, span=self.span_from(t))
            parts = [first]
            while self.accept(","):
                parts.append(self.parse_expr())
            self.expect("}", "to close the concatenation")
            return A.Concat(parts, span=self.span_from(t))
        self.error(f"expected an expression, found '{_describe(t)}'", t, expected="expression")
        raise _Panic()


# -- name resolution ---------------------------------------------------------

def _resolve(mod: A.ModuleDecl, diags: list):
    declared = {p.name for p in mod.ports} | {p.name for p in mod.params}
    for it in mod.items:
        if isinstance(it, A.NetDecl):
            declared.update(it.names)
        elif isinstance(it, A.ParamDecl):
            declared.add(it.name)
    found_error = False
    reported = set()
    for it in mod.items:
        for node in it.walk():
            if isinstance(node, A.Identifier) and node.name not in declared \
                    and not node.name.startswith("$"):
                key = (node.name, node.span.start if node.span else 0)
                if key in reported:
                    continue
                reported.add(key)
                diags.append(make("SYN001", node.span,
                                  f"'{node.name}' is not declared in module {mod.name}",
                                  hint=f"declare '{node.name}' as a wire, reg or port"))
                found_error = True
    for p in list(mod.params) + [p for p in mod.ports if p.range]:
        nodes = p.value.walk() if isinstance(p, A.ParamDecl) else p.range.walk()
        for node in nodes:
            if isinstance(node, A.Identifier) and node.name not in declared:
                diags.append(make("SYN001", node.span,
                                  f"'{node.name}' is not declared in module {mod.name}"))
                found_error = True
    if found_error:
        mod.has_errors = True


def parse(tokens: Sequence[Token], macros: dict = None) -> ParseResult:
    """Parse a preprocessed token list."""
    p = Parser([t for t in tokens if t.kind != ERRTOK])
    tree = p.parse()
    diags = list(p.diags)
    if not any(d.rule == "SYN999" for d in diags):
        for mod in tree.modules:
            _resolve(mod, diags)
    tree.diagnostics = diags
    return ParseResult(tree, diags, dict(macros or {}))


def parse_source(text: str, file: str = "<input>",
                 defines: Mapping[str, str] = None) -> ParseResult:
    """Tokenize, preprocess and parse ``text`` in one go."""
    toks, lex_diags = tokenize(text, file)
    toks, pp_diags, table = preprocess(toks, defines_from_strings(defines or {}))
    result = parse(toks, table)
    diags = lex_diags + pp_diags + result.diagnostics
    diags.sort(key=lambda d: (d.span.file, d.span.start, d.rule))
    for d in lex_diags + pp_diags:
        if d.is_error:
            for mod in result.ast.modules:
                if mod.span and mod.span.start <= d.span.start < mod.span.end:
                    mod.has_errors = True
    result.ast.diagnostics = diags
    result.diagnostics = diags
    return result
