"""Safe-state predicates over monitor-extended transition systems."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from functools import cached_property

from . import expr as E
from .errors import WellFormednessError
from .ts import TransitionSystem


@dataclass(frozen=True, eq=False)
class Monitor:
    """Auxiliary state bit, initially 0, with next value ``next``."""

    name: str
    next: E.Expr


@dataclass(frozen=True, eq=False)
class CompiledProperty:
    base: TransitionSystem
    safe: E.Expr
    monitors: tuple[Monitor, ...] = ()
    text: str = ""
    depth: int = 0
    labels: tuple[str, ...] = field(default=())

    @property
    def monitor_vars(self) -> tuple[str, ...]:
        return tuple(m.name for m in self.monitors)

    @cached_property
    def system(self) -> TransitionSystem:
        return extend(self.base, self.monitors)


def extend(base: TransitionSystem, monitors: Iterable[Monitor]) -> TransitionSystem:
    monitors = tuple(monitors)
    if not monitors:
        return base
    names = [m.name for m in monitors]
    init = E.and_(base.init, *(E.not_(E.var(n)) for n in names))
    trans = E.and_(base.trans, *(E.iff(E.var(m.name, True), m.next) for m in monitors))
    next_state = None
    if base.next_state is not None:
        next_state = dict(base.next_state)
        next_state.update({m.name: m.next for m in monitors})
    source_map = dict(base.source_map)
    source_map.update({n: (n, 0) for n in names})
    return TransitionSystem(
        vars=base.vars + tuple(names),
        inputs=base.inputs,
        init=init,
        trans=trans,
        source_map=source_map,
        next_state=next_state,
        signals=base.signals,
        ranges=base.ranges,
        clock=base.clock,
    )


def conjoin(props: Iterable[CompiledProperty], text: str = "") -> CompiledProperty:
    """Conjunction of properties compiled against one base system.

    Monitors are merged by name; equal names always carry equal
    definitions because names are derived from the definitions.
    """
    props = list(props)
    if not props:
        raise ValueError("conjoin needs at least one property")
    base = props[0].base
    merged: dict[str, Monitor] = {}
    for p in props:
        if p.base is not base:
            raise WellFormednessError("properties compiled against different systems")
        for m in p.monitors:
            prev = merged.get(m.name)
            if prev is None:
                merged[m.name] = m
            elif prev.next is not m.next:
                raise WellFormednessError(f"conflicting definitions for monitor {m.name}")
    labels = tuple(lbl for p in props for lbl in (p.labels or (p.text,)))
    return CompiledProperty(
        base=base,
        safe=E.conj(p.safe for p in props),
        monitors=tuple(merged.values()),
        text=text or " and ".join(f"({p.text})" for p in props),
        depth=max(p.depth for p in props),
        labels=labels,
    )


def boolean_property(base: TransitionSystem, safe: E.Expr, text: str = "") -> CompiledProperty:
    """A monitor-free property whose safe predicate is ``safe`` itself."""
    return CompiledProperty(base=base, safe=safe, text=text or E.to_str(safe))
