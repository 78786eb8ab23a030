"""Constant folding for parameters, ranges and case labels."""

from __future__ import annotations

from . import ast as A


class NotConstant(ValueError):
    pass


def _clog2(n: int) -> int:
    return max(0, (n - 1).bit_length())


def const_eval(e, params: dict) -> int:
    """Evaluate ``e`` using parameter values; raises NotConstant."""
    if isinstance(e, A.Number):
        if e.literal.xz_mask:
            raise NotConstant("x/z literal")
        return e.literal.value
    if isinstance(e, A.Identifier):
        if e.name in params:
            return params[e.name]
        raise NotConstant(e.name)
    if isinstance(e, A.Unary):
        v = const_eval(e.operand, params)
        if e.op == "-":
            return -v
        if e.op == "+":
            return v
        if e.op == "!":
            return int(not v)
        if e.op == "~":
            return ~v
        raise NotConstant(e.op)
    if isinstance(e, A.Binary):
        a, b = const_eval(e.left, params), const_eval(e.right, params)
        op = e.op
        if op == "+": return a + b
        if op == "-": return a - b
        if op == "*": return a * b
        if op == "/":
            if b == 0:
                raise NotConstant("division by zero")
            return int(a / b)
        if op == "%":
            if b == 0:
                raise NotConstant("division by zero")
            return a % b
        if op == "**": return a ** b
        if op == "<<" or op == "<<<": return a << b
        if op == ">>" or op == ">>>": return a >> b
        if op == "&": return a & b
        if op == "|": return a | b
        if op == "^": return a ^ b
        if op in ("==", "==="): return int(a == b)
        if op in ("!=", "!=="): return int(a != b)
        if op == "<": return int(a < b)
        if op == "<=": return int(a <= b)
        if op == ">": return int(a > b)
        if op == ">=": return int(a >= b)
        if op == "&&": return int(bool(a) and bool(b))
        if op == "||": return int(bool(a) or bool(b))
        raise NotConstant(op)
    if isinstance(e, A.Ternary):
        return const_eval(e.then if const_eval(e.cond, params) else e.other, params)
    if isinstance(e, A.Call) and e.name == "$clog2" and len(e.args) == 1:
        return _clog2(const_eval(e.args[0], params))
    raise NotConstant(type(e).__name__)


def module_params(mod: A.ModuleDecl, overrides: dict = None) -> dict:
    """Resolve parameter and localparam values of ``mod`` in declaration order."""
    overrides = overrides or {}
    values: dict[str, int] = {}
    for p in mod.params:
        if not p.local and p.name in overrides:
            values[p.name] = overrides[p.name]
        else:
            values[p.name] = const_eval(p.value, values)
    for it in mod.items:
        if isinstance(it, A.ParamDecl):
            if not it.local and it.name in overrides:
                values[it.name] = overrides[it.name]
            else:
                values[it.name] = const_eval(it.value, values)
    return values


def range_bounds(rng, params: dict) -> tuple[int, int]:
    """(msb, lsb) of a declared range; a missing range is a single bit."""
    if rng is None:
        return 0, 0
    return const_eval(rng.msb, params), const_eval(rng.lsb, params)


def range_width(rng, params: dict) -> int:
    msb, lsb = range_bounds(rng, params)
    return abs(msb - lsb) + 1


_RELATIONAL = {"==", "!=", "===", "!==", "<", "<=", ">", ">=", "&&", "||"}


def self_width(e, width_of, params: dict) -> int:
    """Self-determined bit width of an expression.

    ``width_of(name)`` returns the declared width of a signal or raises
    KeyError.
    """
    if isinstance(e, A.Number):
        return e.literal.width or 32
    if isinstance(e, A.Identifier):
        if e.name in params:
            return 32
        return width_of(e.name)
    if isinstance(e, A.Unary):
        if e.op in ("!", "&", "|", "^", "~&", "~|", "~^", "^~"):
            return 1
        return self_width(e.operand, width_of, params)
    if isinstance(e, A.Binary):
        if e.op in _RELATIONAL:
            return 1
        if e.op in ("<<", ">>", "<<<", ">>>", "**"):
            return self_width(e.left, width_of, params)
        return max(self_width(e.left, width_of, params), self_width(e.right, width_of, params))
    if isinstance(e, A.Ternary):
        return max(self_width(e.then, width_of, params), self_width(e.other, width_of, params))
    if isinstance(e, A.Concat):
        return sum(self_width(p, width_of, params) for p in e.parts)
    if isinstance(e, A.Replicate):
        return const_eval(e.count, params) * sum(self_width(p, width_of, params) for p in e.parts)
    if isinstance(e, A.Index):
        return 1
    if isinstance(e, A.Slice):
        if e.mode == ":":
            return abs(const_eval(e.msb, params) - const_eval(e.lsb, params)) + 1
        return const_eval(e.lsb, params)
    if isinstance(e, A.Call):
        if e.name in ("$signed", "$unsigned") and e.args:
            return self_width(e.args[0], width_of, params)
        return 32
    raise NotConstant(type(e).__name__)
