"""Token-level preprocessor: object-like `define macros only."""

from __future__ import annotations

from dataclasses import replace
from typing import Mapping, Sequence

from ..diagnostics import Diagnostic, make
from .tokens import DIRECTIVE, EOF, MACRO, Token, tokenize

MAX_DEPTH = 16


def _line_tail(tokens: Sequence[Token], i: int) -> int:
    """Index one past the last token on the same source line as tokens[i]."""
    line = tokens[i].span.line
    j = i + 1
    while j < len(tokens) and tokens[j].kind != EOF and tokens[j].span.line == line:
        j += 1
    return j


def defines_from_strings(defines: Mapping[str, str]) -> dict[str, list[Token]]:
    """Tokenize ``NAME=VALUE`` style command-line defines."""
    table = {}
    for name, text in defines.items():
        toks, _ = tokenize(text or "1", file=f"<define {name}>")
        table[name] = toks[:-1]
    return table


def preprocess(tokens: Sequence[Token], defines: Mapping[str, Sequence[Token]] = None):
    """Expand macros in a token list.

    Returns ``(tokens, diagnostics, macro_table)``.  Undefined macro uses are
    kept in place as opaque macro-use tokens.
    """
    table: dict[str, list[Token]] = {k: list(v) for k, v in (defines or {}).items()}
    out: list[Token] = []
    diags: list[Diagnostic] = []
    warned_directives = set()

    def expand(tok: Token, depth: int, active: tuple):
        name = tok.value
        if name not in table:
            diags.append(make("PRE001", tok.span, f"undefined macro {name}",
                              hint=f"add `define {name} <value> or replace the macro with a literal"))
            out.append(tok)
            return
        if depth >= MAX_DEPTH or name in active:
            diags.append(make("PRE002", tok.span,
                              f"macro expansion of {name} exceeds depth {MAX_DEPTH}"))
            return
        for t in table[name]:
            if t.kind == MACRO:
                expand(replace(t, span=tok.span), depth + 1, active + (name,))
            else:
                out.append(replace(t, span=tok.span))

    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.kind == DIRECTIVE:
            end = _line_tail(tokens, i)
            if tok.value == "define":
                if end == i + 1:
                    diags.append(make("SYN000", tok.span, "`define without a macro name"))
                else:
                    table[tokens[i + 1].text] = list(tokens[i + 2:end])
            elif tok.value == "undef":
                if end > i + 1:
                    table.pop(tokens[i + 1].text, None)
            elif tok.value not in ("timescale", "default_nettype", "resetall",
                                   "celldefine", "endcelldefine"):
                if tok.value not in warned_directives:
                    warned_directives.add(tok.value)
                    diags.append(make("PRE003", tok.span, f"unsupported directive `{tok.value}",
                                      hint="conditional compilation and includes are ignored"))
            i = end
            continue
        if tok.kind == MACRO:
            expand(tok, 0, ())
        else:
            out.append(tok)
        i += 1
    return out, diags, table
