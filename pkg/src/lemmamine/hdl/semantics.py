"""Direct trace semantics of the property subset, used as a test oracle.

Nothing here builds monitors or formulas: signal values are integers
read off explicit states, expressions are evaluated with Python integer
arithmetic, and an assertion attempt is walked cycle by cycle along
concrete input sequences. Comparing :func:`earliest_violation` with a
breadth-first search over the monitor-extended system checks the monitor
construction end to end.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

from .. import expr as E
from ..ts import TransitionSystem, _next_states, reachable_layers
from . import ast as A

INT_WIDTH = 32


def _mask(w: int) -> int:
    return (1 << w) - 1


@dataclass
class Env:
    values: Mapping[str, int]
    widths: Mapping[str, int]
    ranges: Mapping[str, tuple[int, int]]

    def bit(self, name: str, index: int) -> int:
        w = self.widths[name]
        msb, lsb = self.ranges.get(name, (w - 1, 0))
        pos = index - lsb if msb >= lsb else lsb - index
        return (self.values[name] >> pos) & 1 if 0 <= pos < w else 0


def self_width(node: A.Node, env: Env) -> int:
    if isinstance(node, A.Number):
        return node.width or INT_WIDTH
    if isinstance(node, A.Ident):
        return env.widths[node.name]
    if isinstance(node, A.Index):
        return 1
    if isinstance(node, A.Slice):
        return abs(value(node.msb, env) - value(node.lsb, env)) + 1
    if isinstance(node, A.Unary):
        return self_width(node.operand, env) if node.op in ("~", "-", "+") else 1
    if isinstance(node, A.Binary):
        if node.op in ("+", "-", "*", "&", "|", "^", "~^", "^~"):
            return max(self_width(node.left, env), self_width(node.right, env))
        if node.op in ("<<", ">>", "<<<", ">>>"):
            return self_width(node.left, env)
        return 1
    if isinstance(node, A.Ternary):
        return max(self_width(node.then, env), self_width(node.other, env))
    if isinstance(node, A.Concat):
        return sum(self_width(x, env) for x in node.items)
    if isinstance(node, A.Repl):
        return value(node.count, env) * sum(self_width(x, env) for x in node.items)
    if isinstance(node, A.SysCall):
        return 1
    raise TypeError(type(node).__name__)


def value(node: A.Node, env: Env, w: int | None = None) -> int:
    """Integer value of ``node`` in a context of width ``w`` (self width by default)."""
    if w is None:
        w = self_width(node, env)
    m = _mask(w)
    if isinstance(node, A.Number):
        return node.value & _mask(node.width or INT_WIDTH) & m
    if isinstance(node, A.Ident):
        return env.values[node.name] & m
    if isinstance(node, A.Index):
        return env.bit(node.name, value(node.index, env)) & m
    if isinstance(node, A.Slice):
        hi, lo = value(node.msb, env), value(node.lsb, env)
        bits = [env.bit(node.name, k) for k in range(min(hi, lo), max(hi, lo) + 1)]
        msb, lsb = env.ranges.get(node.name, (env.widths[node.name] - 1, 0))
        if msb < lsb:
            bits.reverse()
        return sum(b << k for k, b in enumerate(bits)) & m
    if isinstance(node, A.Unary):
        op = node.op
        if op == "~":
            return ~value(node.operand, env, w) & m
        if op == "-":
            return -value(node.operand, env, w) & m
        if op == "+":
            return value(node.operand, env, w)
        sw = self_width(node.operand, env)
        v = value(node.operand, env, sw)
        ones = bin(v).count("1")
        result = {
            "!": v == 0, "&": v == _mask(sw), "|": v != 0, "^": ones % 2 == 1,
            "~&": v != _mask(sw), "~|": v == 0, "~^": ones % 2 == 0, "^~": ones % 2 == 0,
        }[op]
        return int(result) & m
    if isinstance(node, A.Binary):
        op = node.op
        if op in ("+", "-", "*", "&", "|", "^", "~^", "^~"):
            a, b = value(node.left, env, w), value(node.right, env, w)
            out = {"+": a + b, "-": a - b, "*": a * b, "&": a & b, "|": a | b, "^": a ^ b,
                   "~^": ~(a ^ b), "^~": ~(a ^ b)}[op]
            return out & m
        if op in ("<<", ">>", "<<<", ">>>"):
            a = value(node.left, env, w)
            s = value(node.right, env)
            return (a << s) & m if op in ("<<", "<<<") else (a >> s) & m
        if op in ("==", "!=", "===", "!==", "<", "<=", ">", ">="):
            cw = max(self_width(node.left, env), self_width(node.right, env))
            a, b = value(node.left, env, cw), value(node.right, env, cw)
            out = {"==": a == b, "!=": a != b, "===": a == b, "!==": a != b,
                   "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]
            return int(out) & m
        a, b = truthy(node.left, env), truthy(node.right, env)
        out = {"&&": a and b, "||": a or b, "->": (not a) or b, "<->": a == b}[op]
        return int(out) & m
    if isinstance(node, A.Ternary):
        pick = node.then if truthy(node.cond, env) else node.other
        return value(pick, env, w)
    if isinstance(node, (A.Concat, A.Repl)):
        items = node.items if isinstance(node, A.Concat) else node.items * value(node.count, env)
        acc = 0
        for item in items:
            iw = self_width(item, env)
            acc = (acc << iw) | value(item, env, iw)
        return acc & m
    if isinstance(node, A.SysCall):
        ones = bin(value(node.args[0], env)).count("1")
        return int(ones == 1 if node.name == "$onehot" else ones <= 1) & m
    raise TypeError(type(node).__name__)


def truthy(node: A.Node, env: Env) -> bool:
    return value(node, env) != 0


@dataclass(frozen=True)
class Attempt:
    """One implication with absolute term offsets and its effective disable."""

    ante: tuple[tuple[int, A.Node], ...]
    cons: tuple[tuple[int, A.Node], ...]
    disable: tuple[A.Node, ...]

    @property
    def horizon(self) -> int:
        return self.cons[-1][0]


def attempts(prop: A.PropertyAst) -> list[Attempt]:
    out: list[Attempt] = []

    def walk(node: A.PropNode, dis: tuple[A.Node, ...]) -> None:
        if isinstance(node, A.PropAnd):
            for item in node.items:
                walk(item, dis)
        elif isinstance(node, A.PropRef):
            extra = (node.target.disable,) if node.target.disable is not None else ()
            walk(node.target.body, dis + extra)
        elif isinstance(node, A.SeqProp):
            out.append(Attempt((), _absolute(node.seq, 0), dis))
        else:
            ante = _absolute(node.ante, 0)
            start = ante[-1][0] + (0 if node.overlapping else 1)
            out.append(Attempt(ante, _absolute(node.cons, start), dis))

    walk(prop.body, (prop.disable,) if prop.disable is not None else ())
    return out


def _absolute(seq: A.Sequence, start: int) -> tuple[tuple[int, A.Node], ...]:
    at, out = start, []
    for delay, node in seq.terms:
        at += delay
        out.append((at, node))
    return tuple(out)


def failure_offset(att: Attempt, envs: list[Env]) -> int | None:
    """Cycle (relative to the attempt start) at which the attempt fails, if it does."""
    for j, env in enumerate(envs):
        if any(truthy(d, env) for d in att.disable):
            return None
        if not all(truthy(n, env) for off, n in att.ante if off == j):
            return None
        if not all(truthy(n, env) for off, n in att.cons if off == j):
            return j
        if j >= att.horizon:
            return None
    return None


class _SignalReader:
    def __init__(self, ts: TransitionSystem):
        self.ts = ts
        self.fns = {name: E.compile_py(list(bits), ts.slots()) for name, bits in ts.signals.items()}
        self.widths = {name: len(bits) for name, bits in ts.signals.items()}

    def env(self, state: tuple[int, ...], inputs: tuple[int, ...]) -> Env:
        vals = {}
        for name, fn in self.fns.items():
            bits = fn(state, (), inputs)
            vals[name] = sum(int(b) << k for k, b in enumerate(bits))
        return Env(vals, self.widths, self.ts.ranges)


def earliest_violation(ts: TransitionSystem, prop: A.PropertyAst, horizon: int = 12) -> int | None:
    """Least frame ``f < horizon`` at which some initialized run detects a failure."""
    reader = _SignalReader(ts)
    valuations = ts.input_valuations()
    layers = reachable_layers(ts, horizon - 1)
    atts = attempts(prop)
    window = max(a.horizon for a in atts) + 1
    cache: dict[tuple[tuple[int, ...], int], int | None] = {}

    def least_failure(state: tuple[int, ...], room: int) -> int | None:
        key = (state, room)
        if key in cache:
            return cache[key]
        best: int | None = None
        length = min(window, room)
        for path in _runs(ts, state, valuations, length):
            envs = [reader.env(s, i) for s, i in path]
            for att in atts:
                j = failure_offset(att, envs)
                if j is not None and (best is None or j < best):
                    best = j
        cache[key] = best
        return best

    result: int | None = None
    for t, layer in enumerate(layers):
        if result is not None and t >= result:
            break
        for s in layer:
            j = least_failure(s, horizon - t)
            if j is not None and (result is None or t + j < result):
                result = t + j
    return result


def _runs(ts: TransitionSystem, state: tuple[int, ...], valuations, length: int):
    """All concrete (state, inputs) sequences of ``length`` cycles starting at ``state``."""
    if length == 0:
        return
    for first in valuations:
        if length == 1:
            yield [(state, first)]
            continue
        for t in _next_states(ts, state, first):
            for rest in _runs(ts, t, valuations, length - 1):
                yield [(state, first)] + rest

