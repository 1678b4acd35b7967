"""Lowering of HDL expressions to LSB-first lists of boolean formulas.

Widths follow the unsigned IEEE 1364 rules: unsized literals are 32 bits,
arithmetic and bitwise operators are context-determined (operands are
zero-extended to the width of the enclosing context), while comparisons,
logical operators, reductions and concatenation operands are
self-determined. Signed arithmetic is not modelled.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

from .. import expr as E
from ..errors import FrontendError, HdlSyntaxError, UnknownSignal, UnsupportedConstruct
from . import ast as A

Bits = list[E.Expr]
INT_WIDTH = 32


@dataclass
class Scope:
    signals: Mapping[str, tuple[E.Expr, ...]]
    ranges: Mapping[str, tuple[int, int]] = field(default_factory=dict)
    params: Mapping[str, tuple[int, int]] = field(default_factory=dict)

    def bits_of(self, name: str) -> tuple[E.Expr, ...]:
        if name in self.params:
            value, width = self.params[name]
            return tuple(const_bits(value, width))
        if name in self.signals:
            return tuple(self.signals[name])
        raise UnknownSignal(f"unknown signal {name!r}")

    def position(self, name: str, index: int) -> int | None:
        bits = self.bits_of(name)
        msb, lsb = self.ranges.get(name, (len(bits) - 1, 0))
        pos = index - lsb if msb >= lsb else lsb - index
        return pos if 0 <= pos < len(bits) else None


def const_bits(value: int, width: int) -> Bits:
    return [E.const(bool((value >> k) & 1)) for k in range(width)]


def const_eval(node: A.Node, params: Mapping[str, tuple[int, int]]) -> int:
    """Evaluate a constant expression (parameters, literals, arithmetic)."""
    if isinstance(node, A.Number):
        return node.value
    if isinstance(node, A.Ident):
        if node.name in params:
            return params[node.name][0]
        raise FrontendError(f"{node.name!r} is not a constant")
    if isinstance(node, A.Unary):
        v = const_eval(node.operand, params)
        if node.op == "-":
            return -v
        if node.op == "+":
            return v
        if node.op == "!":
            return int(not v)
        if node.op == "~":
            return ~v & ((1 << INT_WIDTH) - 1)
    if isinstance(node, A.Binary):
        a = const_eval(node.left, params)
        b = const_eval(node.right, params)
        ops = {
            "+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b,
            "/": lambda: a // b, "%": lambda: a % b, "**": lambda: a ** b,
            "<<": lambda: a << b, ">>": lambda: a >> b,
            "&": lambda: a & b, "|": lambda: a | b, "^": lambda: a ^ b,
            "==": lambda: int(a == b), "!=": lambda: int(a != b),
            "<": lambda: int(a < b), "<=": lambda: int(a <= b),
            ">": lambda: int(a > b), ">=": lambda: int(a >= b),
            "&&": lambda: int(bool(a) and bool(b)), "||": lambda: int(bool(a) or bool(b)),
        }
        if node.op in ops:
            try:
                return ops[node.op]()
            except ZeroDivisionError as exc:
                raise FrontendError("division by zero in constant expression") from exc
    if isinstance(node, A.Ternary):
        return const_eval(node.then if const_eval(node.cond, params) else node.other, params)
    raise FrontendError("expression is not constant")


def try_const(node: A.Node, params: Mapping[str, tuple[int, int]]) -> int | None:
    try:
        return const_eval(node, params)
    except FrontendError:
        return None


# -- widths ---------------------------------------------------------------------

_CONTEXT_BINARY = {"+", "-", "*", "&", "|", "^", "~^", "^~"}
_COMPARE = {"==", "!=", "===", "!==", "<", "<=", ">", ">="}
_LOGICAL = {"&&", "||", "->", "<->"}
_REDUCE = {"&", "|", "^", "~&", "~|", "~^", "^~"}


def width(node: A.Node, scope: Scope) -> int:
    """Self-determined width of ``node``."""
    if isinstance(node, A.Number):
        return node.width or INT_WIDTH
    if isinstance(node, A.Ident):
        return len(scope.bits_of(node.name))
    if isinstance(node, A.Index):
        return 1
    if isinstance(node, A.Slice):
        msb = const_eval(node.msb, scope.params)
        lsb = const_eval(node.lsb, scope.params)
        return abs(msb - lsb) + 1
    if isinstance(node, A.Unary):
        if node.op in ("~", "-", "+"):
            return width(node.operand, scope)
        return 1
    if isinstance(node, A.Binary):
        if node.op in _CONTEXT_BINARY:
            return max(width(node.left, scope), width(node.right, scope))
        if node.op in ("<<", ">>", "<<<", ">>>"):
            return width(node.left, scope)
        if node.op in _COMPARE or node.op in _LOGICAL:
            return 1
        raise UnsupportedConstruct(f"operator {node.op}")
    if isinstance(node, A.Ternary):
        return max(width(node.then, scope), width(node.other, scope))
    if isinstance(node, A.Concat):
        return sum(width(x, scope) for x in node.items)
    if isinstance(node, A.Repl):
        return const_eval(node.count, scope.params) * sum(width(x, scope) for x in node.items)
    if isinstance(node, A.SysCall):
        if node.name in ("$onehot", "$onehot0"):
            return 1
        raise UnsupportedConstruct(f"system function {node.name}")
    if isinstance(node, (A.TemporalParen, A.PropRef)):
        raise HdlSyntaxError("temporal property used inside a boolean expression")
    raise UnsupportedConstruct(type(node).__name__)


# -- bit-level building blocks -----------------------------------------------------------

def fit(bits: Bits, w: int) -> Bits:
    if len(bits) >= w:
        return list(bits[:w])
    return list(bits) + [E.FALSE] * (w - len(bits))


def reduce_or(bits: Bits) -> E.Expr:
    return E.or_(*bits)


def add(a: Bits, b: Bits, carry: E.Expr = E.FALSE) -> Bits:
    out = []
    for x, y in zip(a, b):
        out.append(E.xor(E.xor(x, y), carry))
        carry = E.or_(E.and_(x, y), E.and_(carry, E.xor(x, y)))
    return out


def negate(a: Bits) -> Bits:
    return add([E.not_(x) for x in a], const_bits(0, len(a)), E.TRUE)


def equal(a: Bits, b: Bits) -> E.Expr:
    return E.and_(*(E.iff(x, y) for x, y in zip(a, b)))


def less_than(a: Bits, b: Bits) -> E.Expr:
    lt = E.FALSE
    for x, y in zip(a, b):
        lt = E.or_(E.and_(E.not_(x), y), E.and_(E.iff(x, y), lt))
    return lt


def multiply(a: Bits, b: Bits) -> Bits:
    w = len(a)
    acc = const_bits(0, w)
    for j, bj in enumerate(b[:w]):
        partial = [E.FALSE] * j + [E.and_(x, bj) for x in a[: w - j]]
        acc = add(acc, partial)
    return acc


def shift(a: Bits, amount: Bits, left: bool) -> Bits:
    w = len(a)
    cur = list(a)
    for k, s in enumerate(amount):
        dist = 1 << k
        if dist >= w:
            cur = [E.ite(s, E.FALSE, x) for x in cur]
            continue
        if left:
            moved = [E.FALSE] * dist + cur[: w - dist]
        else:
            moved = cur[dist:] + [E.FALSE] * dist
        cur = [E.ite(s, m, x) for m, x in zip(moved, cur)]
    return cur


def exactly_one(bits: Bits) -> E.Expr:
    return E.and_(reduce_or(bits), at_most_one(bits))


def at_most_one(bits: Bits) -> E.Expr:
    seen = E.FALSE
    ok = E.TRUE
    for x in bits:
        ok = E.and_(ok, E.not_(E.and_(x, seen)))
        seen = E.or_(seen, x)
    return ok


# -- lowering ---------------------------------------------------------------------------

def truth(node: A.Node, scope: Scope) -> E.Expr:
    """Boolean value of ``node`` (any bit set)."""
    return reduce_or(lower(node, width(node, scope), scope))


def lower(node: A.Node, w: int, scope: Scope) -> Bits:
    """Bits of ``node`` evaluated in a context of width ``w``."""
    if isinstance(node, A.Number):
        v = node.value & ((1 << (node.width or INT_WIDTH)) - 1)
        return const_bits(v, w)
    if isinstance(node, A.Ident):
        return fit(list(scope.bits_of(node.name)), w)
    if isinstance(node, A.Index):
        bits = scope.bits_of(node.name)
        k = try_const(node.index, scope.params)
        if k is not None:
            pos = scope.position(node.name, k)
            bit = bits[pos] if pos is not None else E.FALSE
        else:
            idx = lower(node.index, width(node.index, scope), scope)
            msb, lsb = scope.ranges.get(node.name, (len(bits) - 1, 0))
            options = []
            for j in range(min(msb, lsb), max(msb, lsb) + 1):
                pos = scope.position(node.name, j)
                cw = max(len(idx), j.bit_length(), 1)
                options.append(E.and_(equal(fit(idx, cw), const_bits(j, cw)), bits[pos]))
            bit = E.or_(*options)
        return fit([bit], w)
    if isinstance(node, A.Slice):
        bits = scope.bits_of(node.name)
        msb = const_eval(node.msb, scope.params)
        lsb = const_eval(node.lsb, scope.params)
        lo, hi = sorted((scope.position(node.name, msb), scope.position(node.name, lsb)),
                        key=lambda p: -1 if p is None else p)
        if lo is None or hi is None:
            raise FrontendError(f"part-select {node.name}[{msb}:{lsb}] out of range")
        return fit(list(bits[lo:hi + 1]), w)
    if isinstance(node, A.Unary):
        op = node.op
        if op == "~":
            return [E.not_(x) for x in lower(node.operand, w, scope)]
        if op == "-":
            return negate(lower(node.operand, w, scope))
        if op == "+":
            return lower(node.operand, w, scope)
        inner = lower(node.operand, width(node.operand, scope), scope)
        if op == "!":
            bit = E.not_(reduce_or(inner))
        elif op == "&":
            bit = E.and_(*inner)
        elif op == "|":
            bit = reduce_or(inner)
        elif op == "^":
            bit = _parity(inner)
        elif op == "~&":
            bit = E.not_(E.and_(*inner))
        elif op == "~|":
            bit = E.not_(reduce_or(inner))
        elif op in ("~^", "^~"):
            bit = E.not_(_parity(inner))
        else:
            raise UnsupportedConstruct(f"unary operator {op}")
        return fit([bit], w)
    if isinstance(node, A.Binary):
        return _lower_binary(node, w, scope)
    if isinstance(node, A.Ternary):
        c = truth(node.cond, scope)
        a = lower(node.then, w, scope)
        b = lower(node.other, w, scope)
        return [E.ite(c, x, y) for x, y in zip(a, b)]
    if isinstance(node, A.Concat):
        out: Bits = []
        for item in reversed(node.items):
            out.extend(lower(item, width(item, scope), scope))
        return fit(out, w)
    if isinstance(node, A.Repl):
        n = const_eval(node.count, scope.params)
        chunk: Bits = []
        for item in reversed(node.items):
            chunk.extend(lower(item, width(item, scope), scope))
        return fit(chunk * n, w)
    if isinstance(node, A.SysCall):
        if node.name in ("$onehot", "$onehot0") and len(node.args) == 1:
            arg = lower(node.args[0], width(node.args[0], scope), scope)
            bit = exactly_one(arg) if node.name == "$onehot" else at_most_one(arg)
            return fit([bit], w)
        raise UnsupportedConstruct(f"system function {node.name}")
    if isinstance(node, (A.TemporalParen, A.PropRef)):
        raise HdlSyntaxError("temporal property used inside a boolean expression")
    raise UnsupportedConstruct(type(node).__name__)


def _parity(bits: Bits) -> E.Expr:
    acc = E.FALSE
    for x in bits:
        acc = E.xor(acc, x)
    return acc


def _lower_binary(node: A.Binary, w: int, scope: Scope) -> Bits:
    op = node.op
    if op in _CONTEXT_BINARY:
        a = lower(node.left, w, scope)
        b = lower(node.right, w, scope)
        if op == "+":
            return add(a, b)
        if op == "-":
            return add(a, [E.not_(x) for x in b], E.TRUE)
        if op == "*":
            return multiply(a, b)
        if op == "&":
            return [E.and_(x, y) for x, y in zip(a, b)]
        if op == "|":
            return [E.or_(x, y) for x, y in zip(a, b)]
        if op == "^":
            return [E.xor(x, y) for x, y in zip(a, b)]
        return [E.iff(x, y) for x, y in zip(a, b)]
    if op in ("<<", ">>", "<<<", ">>>"):
        a = lower(node.left, w, scope)
        k = try_const(node.right, scope.params)
        if k is not None:
            if op in ("<<", "<<<"):
                return fit([E.FALSE] * k + a, w)[:w] if k < w else const_bits(0, w)
            return fit(a[k:], w) if k < w else const_bits(0, w)
        amount = lower(node.right, width(node.right, scope), scope)
        return shift(a, amount, op in ("<<", "<<<"))
    if op in _COMPARE:
        cw = max(width(node.left, scope), width(node.right, scope))
        a = lower(node.left, cw, scope)
        b = lower(node.right, cw, scope)
        if op in ("==", "==="):
            bit = equal(a, b)
        elif op in ("!=", "!=="):
            bit = E.not_(equal(a, b))
        elif op == "<":
            bit = less_than(a, b)
        elif op == ">":
            bit = less_than(b, a)
        elif op == "<=":
            bit = E.not_(less_than(b, a))
        else:
            bit = E.not_(less_than(a, b))
        return fit([bit], w)
    if op in _LOGICAL:
        a = truth(node.left, scope)
        b = truth(node.right, scope)
        if op == "&&":
            bit = E.and_(a, b)
        elif op == "||":
            bit = E.or_(a, b)
        elif op == "->":
            bit = E.implies(a, b)
        else:
            bit = E.iff(a, b)
        return fit([bit], w)
    raise UnsupportedConstruct(f"operator {op}")
