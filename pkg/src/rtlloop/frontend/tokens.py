"""Verilog tokenizer.

The tokenizer is total: every character of the input ends up either in a
token or in skipped trivia (whitespace and comments).  Characters that do not
start any valid token become ``error`` tokens with an attached diagnostic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from ..diagnostics import Diagnostic, SourceMap, Span, make

IDENT = "identifier"
KEYWORD = "keyword"
SIZED = "sized-literal"
UNSIZED = "unsized-literal"
OPERATOR = "operator"
PUNCT = "punctuation"
MACRO = "macro-use"
DIRECTIVE = "directive"
STRING = "string"
ERRTOK = "error"
EOF = "eof"

KEYWORDS = frozenset("""
    module endmodule input output inout wire reg integer signed parameter
    localparam assign always initial begin end if else case casez casex
    endcase default posedge negedge or genvar generate endgenerate function
    endfunction task endtask for while forever repeat tri supply0 supply1
""".split())

DIRECTIVES = frozenset("""
    define undef timescale include ifdef ifndef else elsif endif
    default_nettype resetall celldefine endcelldefine
""".split())

OPERATORS = [
    "<<<", ">>>", "===", "!==",
    "==", "!=", "<=", ">=", "&&", "||", "<<", ">>", "~&", "~|", "~^", "^~",
    "**", "+:", "-:",
    "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "<", ">", "?", ":", "=",
]
PUNCTUATION = set("()[]{};,#@.")

_BASES = {"b": 2, "o": 8, "d": 10, "h": 16}
_WS = re.compile(r"[ \t\r\n\f\v]+")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_$]*")
_SYSIDENT = re.compile(r"\$[A-Za-z_][A-Za-z0-9_$]*")
_ESCAPED = re.compile(r"\\[^ \t\r\n]+")
_DEC = re.compile(r"[0-9][0-9_]*")
_BASED = re.compile(r"'([sS]?)([bBoOdDhH])[ \t]*([0-9a-fA-FxXzZ?_]+)")
_DIGITS = {
    2: set("01xz?"),
    8: set("01234567xz?"),
    10: set("0123456789xz?"),
    16: set("0123456789abcdefxz?"),
}


@dataclass(frozen=True)
class Literal:
    """A numeric literal.  ``width`` is None for unsized literals."""

    width: Optional[int]
    base: str
    digits: str
    signed: bool = False

    @property
    def radix(self) -> int:
        return _BASES[self.base]

    def _bits(self):
        """Return (value, xz mask) with x/z digits reported in the mask."""
        radix = self.radix
        if radix == 10:
            if any(c in "xz?" for c in self.digits):
                return 0, (1 << (self.width or 32)) - 1
            return int(self.digits), 0
        per = {2: 1, 8: 3, 16: 4}[radix]
        value = mask = 0
        for c in self.digits:
            value <<= per
            mask <<= per
            if c in "xz?":
                mask |= (1 << per) - 1
            else:
                value |= int(c, 16)
        return value, mask

    @property
    def value(self) -> int:
        v = self._bits()[0]
        if self.width is not None:
            v &= (1 << self.width) - 1
        return v

    @property
    def xz_mask(self) -> int:
        m = self._bits()[1]
        if self.width is not None:
            m &= (1 << self.width) - 1
        return m

    def text(self) -> str:
        if self.base == "d" and self.width is None and not self.signed:
            return self.digits
        size = "" if self.width is None else str(self.width)
        return f"{size}'{'s' if self.signed else ''}{self.base}{self.digits}"


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: Span
    # parsed literal for number kinds, macro name for macro-use/directive
    value: object = None

    def is_(self, text: str) -> bool:
        return self.text == text and self.kind in (KEYWORD, OPERATOR, PUNCT)

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.span.line}:{self.span.col})"


def _parse_based(width: Optional[int], signed: bool, base: str, raw: str):
    digits = raw.replace("_", "").lower()
    if not digits or not set(digits) <= _DIGITS[_BASES[base]]:
        return None
    return Literal(width, base, digits, signed)


def tokenize(source: str, file: str = "<input>", keep_trivia: bool = False):
    """Split ``source`` into tokens.

    Returns ``(tokens, diagnostics)``.  The token list always ends with an
    ``eof`` token.  With ``keep_trivia`` whitespace and comments are returned
    as ``trivia`` tokens so the input can be rebuilt exactly.
    """
    smap = SourceMap(source, file)
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    n = len(source)
    i = 0

    def emit(kind, start, end, value=None):
        tokens.append(Token(kind, source[start:end], smap.span(start, end), value))

    while i < n:
        c = source[i]
        m = _WS.match(source, i)
        if m:
            if keep_trivia:
                emit("trivia", i, m.end())
            i = m.end()
            continue
        if source.startswith("//", i):
            j = source.find("\n", i)
            j = n if j < 0 else j
            if keep_trivia:
                emit("trivia", i, j)
            i = j
            continue
        if source.startswith("/*", i):
            j = source.find("*/", i + 2)
            if j < 0:
                # Unterminated comment: flag the opener only, keep lexing.
                emit(ERRTOK, i, i + 2)
                diags.append(make("SYN000", tokens[-1].span, "unterminated block comment",
                                  hint="close the comment with */"))
                i += 2
                continue
            if keep_trivia:
                emit("trivia", i, j + 2)
            i = j + 2
            continue
        if c == "`":
            m = _IDENT.match(source, i + 1)
            if not m:
                emit(ERRTOK, i, i + 1)
                diags.append(make("SYN000", tokens[-1].span, "stray backtick"))
                i += 1
                continue
            name = m.group()
            kind = DIRECTIVE if name in DIRECTIVES else MACRO
            emit(kind, i, m.end(), name)
            i = m.end()
            continue
        if c == '"':
            j = i + 1
            while j < n and source[j] not in '"\n':
                j += 2 if source[j] == "\\" else 1
            j = min(j, n)
            if j < n and source[j] == '"':
                emit(STRING, i, j + 1)
                i = j + 1
            else:
                emit(ERRTOK, i, j)
                diags.append(make("SYN000", tokens[-1].span, "unterminated string literal"))
                i = j
            continue
        if "0" <= c <= "9":
            m = _DEC.match(source, i)
            j = m.end()
            k = j
            while k < n and source[k] in " \t":
                k += 1
            b = _BASED.match(source, k)
            if b:
                width = int(m.group().replace("_", ""))
                lit = _parse_based(width, bool(b.group(1)), b.group(2).lower(), b.group(3))
                if lit is not None and width > 0:
                    emit(SIZED, i, b.end(), lit)
                else:
                    emit(ERRTOK, i, b.end())
                    diags.append(make("SYN000", tokens[-1].span,
                                      f"malformed literal {tokens[-1].text!r}"))
                i = b.end()
                continue
            emit(UNSIZED, i, j, Literal(None, "d", m.group().replace("_", "")))
            i = j
            continue
        if c == "'":
            b = _BASED.match(source, i)
            if b:
                lit = _parse_based(None, bool(b.group(1)), b.group(2).lower(), b.group(3))
                if lit is not None:
                    emit(UNSIZED, i, b.end(), lit)
                else:
                    emit(ERRTOK, i, b.end())
                    diags.append(make("SYN000", tokens[-1].span,
                                      f"malformed literal {tokens[-1].text!r}"))
                i = b.end()
                continue
        m = _IDENT.match(source, i)
        if m:
            word = m.group()
            emit(KEYWORD if word in KEYWORDS else IDENT, i, m.end())
            i = m.end()
            continue
        m = _SYSIDENT.match(source, i) or _ESCAPED.match(source, i)
        if m:
            emit(IDENT, i, m.end())
            i = m.end()
            continue
        for op in OPERATORS:
            if source.startswith(op, i):
                emit(OPERATOR, i, i + len(op))
                i += len(op)
                break
        else:
            if c in PUNCTUATION:
                emit(PUNCT, i, i + 1)
            else:
                emit(ERRTOK, i, i + 1)
                diags.append(make("SYN000", tokens[-1].span, f"unexpected character {c!r}"))
            i += 1

    tokens.append(Token(EOF, "", smap.span(n, n)))
    return tokens, diags
