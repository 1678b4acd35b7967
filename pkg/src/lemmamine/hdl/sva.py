"""Compilation of safety properties into monitor bits and a safe predicate.

An implication whose terms sit at absolute offsets ``0..D`` (the
antecedent first, the consequent after it) is tracked by a chain of ``D``
monitor bits. ``m_k`` holds when an attempt started ``k`` cycles ago has
matched every antecedent term at offsets ``< k`` and has not been
disabled::

    m_1' = A_0 & !dis        m_{k+1}' = m_k & A_k & !dis        (all m_k start at 0)

where ``A_k`` is the conjunction of antecedent terms at offset ``k``. A
consequent term ``c`` at offset ``j`` is violated in the current cycle when
``m_j & A_j & !dis & !c`` (with ``m_0`` read as true). The safe predicate
is the negation of the disjunction of all violations, so a sampled disable
both clears pending obligations and makes the current cycle vacuous.

Monitor names are derived from their next-state definitions, so equal
chains built by different properties coincide and their conjunction
shares state.
"""

from __future__ import annotations

import re
from collections.abc import Mapping
from dataclasses import dataclass, field, replace

from .. import expr as E
from ..errors import HdlSyntaxError, UnknownSignal, UnsupportedConstruct, UnsupportedTemporalDepth
from ..props import CompiledProperty, Monitor
from ..ts import TransitionSystem
from . import ast as A
from .lexer import repair_ascii
from .lower import Scope, truth
from .parser import parse_property, print_property

DEFAULT_DEPTH_CAP = 4


def _scope(ts: TransitionSystem) -> Scope:
    params = {}
    for name, bits in ts.signals.items():
        if all(E.is_true(b) or E.is_false(b) for b in bits):
            params[name] = (sum(1 << k for k, b in enumerate(bits) if E.is_true(b)), len(bits))
    return Scope(ts.signals, ts.ranges, params)


def _obligations(body: A.PropNode, dis: E.Expr, scope: Scope, seen: tuple[str, ...]):
    """Flatten conjunctions and references into ``(implication, disable)`` pairs."""
    if isinstance(body, A.PropAnd):
        out = []
        for item in body.items:
            out.extend(_obligations(item, dis, scope, seen))
        return out
    if isinstance(body, A.PropRef):
        if body.name in seen:
            raise HdlSyntaxError(f"property {body.name!r} refers to itself")
        target = body.target
        inner = dis
        if target.disable is not None:
            inner = E.or_(dis, truth(target.disable, scope))
        return _obligations(target.body, inner, scope, seen + (body.name,))
    if isinstance(body, A.SeqProp):
        return [(A.Implication(A.Sequence(((0, A.Number(1, 1)),)), body.seq, True), dis)]
    if isinstance(body, A.Implication):
        return [(body, dis)]
    raise TypeError(f"unexpected property node {type(body).__name__}")


def _offsets(seq: A.Sequence, start: int) -> list[tuple[int, A.Node]]:
    out = []
    at = start
    for delay, node in seq.terms:
        at += delay
        out.append((at, node))
    return out


def temporal_depth(prop: A.PropertyAst) -> int:
    """Largest consequent offset over all conjuncts."""
    depth = 0
    stack: list[A.PropNode] = [prop.body]
    while stack:
        node = stack.pop()
        if isinstance(node, A.PropAnd):
            stack.extend(node.items)
        elif isinstance(node, A.PropRef):
            stack.append(node.target.body)
        elif isinstance(node, A.SeqProp):
            depth = max(depth, node.seq.length)
        elif isinstance(node, A.Implication):
            shift = node.ante.length + (0 if node.overlapping else 1)
            depth = max(depth, shift + node.cons.length)
    return depth


def compile_property(prop: A.PropertyAst, ts: TransitionSystem, depth_cap: int = DEFAULT_DEPTH_CAP,
                     text: str | None = None) -> CompiledProperty:
    """Monitor bits and safe predicate for ``prop`` over ``ts``."""
    if prop.clock is not None:
        if prop.clock.edge != "posedge":
            raise UnsupportedConstruct("negedge property clock")
        if ts.clock is not None and prop.clock.signal != ts.clock:
            raise UnknownSignal(f"property clock {prop.clock.signal!r} is not the design clock")
    depth = temporal_depth(prop)
    if depth > depth_cap:
        raise UnsupportedTemporalDepth(f"temporal depth {depth} exceeds the cap of {depth_cap}")
    scope = _scope(ts)
    dis = truth(prop.disable, scope) if prop.disable is not None else E.FALSE
    monitors: dict[str, Monitor] = {}
    violations: list[E.Expr] = []
    for imp, d in _obligations(prop.body, dis, scope, ()):
        ante = _offsets(imp.ante, 0)
        cons = _offsets(imp.cons, ante[-1][0] + (0 if imp.overlapping else 1))
        horizon = cons[-1][0]
        a_at = [E.TRUE] * (horizon + 1)
        for off, node in ante:
            a_at[off] = E.and_(a_at[off], truth(node, scope))
        chain = [E.TRUE]
        for k in range(horizon):
            nxt = E.and_(chain[k], a_at[k], E.not_(d))
            name = f"$mon_{E.fingerprint(nxt)[:12]}"
            prev = monitors.get(name)
            if prev is None:
                monitors[name] = Monitor(name, nxt)
            chain.append(E.var(name))
        for off, node in cons:
            violations.append(E.and_(chain[off], a_at[off], E.not_(d), E.not_(truth(node, scope))))
    used = {n for n, _ in E.support(violations)}
    # keep only monitors that matter, plus their transitive predecessors
    keep: set[str] = set()
    frontier = [n for n in used if n in monitors]
    while frontier:
        n = frontier.pop()
        if n in keep:
            continue
        keep.add(n)
        frontier.extend(s for s, _ in E.support(monitors[n].next) if s in monitors)
    kept = tuple(m for n, m in monitors.items() if n in keep)
    label = text if text is not None else print_property(prop)
    return CompiledProperty(base=ts, safe=E.not_(E.disj(violations)), monitors=kept, text=label,
                            depth=depth, labels=(label,))


@dataclass(frozen=True)
class LemmaContext:
    """How lemma text is read against a design.

    ``symbols`` are named design properties a lemma may reference;
    ``default_disable`` is applied to lemmas that carry no ``disable iff``
    of their own (normally the target property's disable condition).
    """

    symbols: Mapping[str, A.PropertyAst] = field(default_factory=dict)
    default_disable: A.Node | None = None
    depth_cap: int = DEFAULT_DEPTH_CAP


def compile_text(text: str, ts: TransitionSystem, context: LemmaContext | None = None,
                 repair: bool = True) -> CompiledProperty:
    """Parse (after optional Unicode repair) and compile one property."""
    context = context or LemmaContext()
    if repair:
        text, _ = repair_ascii(text)
    prop = parse_property(text, signals=set(ts.signals), symbols=context.symbols)
    if prop.disable is None and context.default_disable is not None:
        prop = replace(prop, disable=context.default_disable)
    return compile_property(prop, ts, context.depth_cap, text=normalize_text(text))


_WS = re.compile(r"\s+")
_PROPERTY_BLOCK = re.compile(r"^\s*property\s+\w+\s*;(?P<body>.*?)endproperty(\s*:\s*\w+)?\s*;?\s*$", re.S)
_ASSERT = re.compile(r"^\s*(\w+\s*:\s*)?assert\s+property\s*\((?P<body>.*)\)\s*;?\s*$", re.S)


def normalize_text(text: str) -> str:
    """Comparison key for lemma text: repaired, unwrapped, whitespace-collapsed."""
    text, _ = repair_ascii(text)
    for pattern in (_PROPERTY_BLOCK, _ASSERT):
        m = pattern.match(text)
        if m:
            text = m.group("body")
            break
    text = _WS.sub(" ", text).strip()
    while text.endswith(";"):
        text = text[:-1].rstrip()
    return text
