"""Elaboration of a parsed design into a bit-level transition system.

Clocked always blocks are executed symbolically: blocking assignments
update an environment in program order, nonblocking assignments collect a
guarded value per bit, and ``if``/``case`` branches are merged with
``ite``. The next value of a register bit is its nonblocking value when
one was scheduled on the path taken, else its blocking value at the end of
the block (which is the current value if nothing was assigned).

Initial states come from ``initial`` blocks and declaration initializers
when the design has any; otherwise from the image of the reset branch,
i.e. the top-level ``if`` of an always block whose condition reads exactly
one input and no register. Without either, registers start unconstrained.
"""

from __future__ import annotations

import logging
from collections import ChainMap
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field

from .. import expr as E
from ..errors import ElaborationError, UnknownSignal
from ..ts import TransitionSystem
from . import ast as A
from .lower import Scope, const_eval, fit, lower, truth, width

log = logging.getLogger(__name__)

IMAGE_SUPPORT_CAP = 16


def bit_names(decl: A.Decl) -> list[str]:
    """State/input variable names for ``decl``, LSB first."""
    if decl.width == 1 and not decl.ranged:
        return [decl.name]
    step = 1 if decl.msb >= decl.lsb else -1
    return [f"{decl.name}[{decl.lsb + step * p}]" for p in range(decl.width)]


class _Wires(Mapping):
    """Signal bits with continuous assignments resolved on demand."""

    def __init__(self, base: dict[str, tuple[E.Expr, ...]], design: A.DesignAst,
                 params: dict[str, tuple[int, int]], ranges: dict[str, tuple[int, int]]):
        self.base = base
        self.params = params
        self.ranges = ranges
        self.drivers: dict[str, list[A.ContAssign]] = {}
        for ca in design.assigns:
            self.drivers.setdefault(ca.target.name, []).append(ca)
        self.decls = design.decls
        self.done: dict[str, tuple[E.Expr, ...]] = {}
        self.active: list[str] = []

    def __contains__(self, name: object) -> bool:
        return name in self.base or name in self.drivers or (
            name in self.decls and self.decls[name].direction != "input" and not self.decls[name].is_reg)

    def __iter__(self) -> Iterator[str]:
        yield from self.base
        yield from (n for n in self.decls if n not in self.base and n in self)

    def __len__(self) -> int:
        return sum(1 for _ in self)

    def __getitem__(self, name: str) -> tuple[E.Expr, ...]:
        if name in self.base:
            return self.base[name]
        if name in self.done:
            return self.done[name]
        if name not in self:
            raise KeyError(name)
        if name in self.active:
            cycle = " -> ".join(self.active[self.active.index(name):] + [name])
            raise ElaborationError(f"combinational cycle: {cycle}", self.decls[name].pos)
        if name not in self.drivers:
            raise ElaborationError(f"wire {name!r} is never driven", self.decls[name].pos)
        decl = self.decls[name]
        self.active.append(name)
        try:
            bits: list[E.Expr | None] = [None] * decl.width
            scope = Scope(self, self.ranges, self.params)
            for ca in self.drivers[name]:
                for pos, value in _target_bits(ca.target, ca.value, scope, decl):
                    if bits[pos] is not None:
                        raise ElaborationError(f"bit {pos} of {name!r} is driven twice", ca.pos)
                    bits[pos] = value
            if any(b is None for b in bits):
                raise ElaborationError(f"wire {name!r} is only partially driven", decl.pos)
        finally:
            self.active.pop()
        self.done[name] = tuple(bits)
        return self.done[name]


def _positions(lv: A.LValue, decl: A.Decl, params) -> list[int]:
    """Constant bit positions selected by an lvalue (LSB-first offsets)."""
    if lv.msb is None:
        return list(range(decl.width))
    hi = const_eval(lv.msb, params)
    lo = const_eval(lv.lsb, params)

    def pos(index: int) -> int:
        p = index - decl.lsb if decl.msb >= decl.lsb else decl.lsb - index
        if not 0 <= p < decl.width:
            raise ElaborationError(f"index {index} out of range for {decl.name!r}", lv.pos)
        return p

    a, b = pos(hi), pos(lo)
    return list(range(min(a, b), max(a, b) + 1))


def _target_bits(lv: A.LValue, value: A.Node, scope: Scope, decl: A.Decl) -> list[tuple[int, E.Expr]]:
    positions = _positions(lv, decl, scope.params)
    w = max(width(value, scope), len(positions))
    bits = fit(lower(value, w, scope), len(positions))
    return list(zip(positions, bits))


@dataclass
class _Frame:
    blk: dict[str, list[E.Expr]]
    nba: dict[str, list[tuple[E.Expr, E.Expr] | None]] = field(default_factory=dict)

    def copy(self) -> _Frame:
        return _Frame({k: list(v) for k, v in self.blk.items()},
                      {k: list(v) for k, v in self.nba.items()})


def _merge(c: E.Expr, a: _Frame, b: _Frame) -> _Frame:
    blk = {}
    for name in a.blk:
        blk[name] = [x if x is y else E.ite(c, x, y) for x, y in zip(a.blk[name], b.blk[name])]
    nba: dict[str, list] = {}
    for name in set(a.nba) | set(b.nba):
        la = a.nba.get(name)
        lb = b.nba.get(name)
        n = len(la if la is not None else lb)
        out = []
        for p in range(n):
            x = la[p] if la is not None else None
            y = lb[p] if lb is not None else None
            if x is None and y is None:
                out.append(None)
            elif y is None:
                out.append((E.and_(c, x[0]), x[1]))
            elif x is None:
                out.append((E.and_(E.not_(c), y[0]), y[1]))
            else:
                out.append((E.ite(c, x[0], y[0]), x[1] if x[1] is y[1] else E.ite(c, x[1], y[1])))
        nba[name] = out
    return _Frame(blk, nba)


class _Executor:
    def __init__(self, design: A.DesignAst, wires: _Wires, regs: dict[str, A.Decl],
                 params, ranges):
        self.design = design
        self.wires = wires
        self.regs = regs
        self.params = params
        self.ranges = ranges
        self.assigned: set[str] = set()
        self.task_stack: list[str] = []

    def scope(self, frame: _Frame) -> Scope:
        return Scope(ChainMap(frame.blk, self.wires), self.ranges, self.params)

    def run(self, stmt: A.Stmt, frame: _Frame) -> _Frame:
        if isinstance(stmt, A.Block):
            for s in stmt.stmts:
                frame = self.run(s, frame)
            return frame
        if isinstance(stmt, A.If):
            c = truth(stmt.cond, self.scope(frame))
            if E.is_true(c):
                return self.run(stmt.then, frame)
            if E.is_false(c):
                return self.run(stmt.other, frame) if stmt.other is not None else frame
            a = self.run(stmt.then, frame.copy())
            b = self.run(stmt.other, frame.copy()) if stmt.other is not None else frame
            return _merge(c, a, b)
        if isinstance(stmt, A.Case):
            return self.run(_case_to_if(stmt), frame)
        if isinstance(stmt, A.TaskCall):
            body = self.design.tasks.get(stmt.name)
            if body is None:
                raise ElaborationError(f"unknown task {stmt.name!r}", stmt.pos)
            if stmt.name in self.task_stack:
                raise ElaborationError(f"recursive task {stmt.name!r}", stmt.pos)
            self.task_stack.append(stmt.name)
            try:
                return self.run(body, frame)
            finally:
                self.task_stack.pop()
        if isinstance(stmt, A.Assign):
            return self.assign(stmt, frame)
        raise ElaborationError(f"unsupported statement {type(stmt).__name__}")

    def assign(self, stmt: A.Assign, frame: _Frame) -> _Frame:
        name = stmt.target.name
        decl = self.regs.get(name)
        if decl is None:
            if name in self.design.decls:
                raise ElaborationError(f"procedural assignment to non-register {name!r}", stmt.pos)
            raise UnknownSignal(f"unknown signal {name!r}", stmt.pos)
        self.assigned.add(name)
        scope = self.scope(frame)
        lv = stmt.target
        if lv.msb is not None and lv.msb is lv.lsb and _is_dynamic(lv.msb, self.params):
            updates = self._dynamic_index(lv, stmt.value, scope, decl)
        else:
            updates = [(p, E.TRUE, v) for p, v in _target_bits(lv, stmt.value, scope, decl)]
        for pos, guard, value in updates:
            if stmt.nonblocking:
                slots = frame.nba.setdefault(name, [None] * decl.width)
                prev = slots[pos]
                if prev is None:
                    slots[pos] = (guard, value)
                elif E.is_true(guard):
                    slots[pos] = (E.TRUE, value)
                else:
                    slots[pos] = (E.or_(guard, prev[0]), E.ite(guard, value, prev[1]))
            else:
                cur = frame.blk[name][pos]
                frame.blk[name][pos] = value if E.is_true(guard) else E.ite(guard, value, cur)
        return frame

    def _dynamic_index(self, lv: A.LValue, value: A.Node, scope: Scope, decl: A.Decl):
        idx = lower(lv.msb, width(lv.msb, scope), scope)
        bit = lower(value, max(width(value, scope), 1), scope)[0]
        out = []
        for p in range(decl.width):
            index = decl.lsb + p if decl.msb >= decl.lsb else decl.lsb - p
            cw = max(len(idx), index.bit_length(), 1)
            sel = E.and_(*(E.iff(a, E.const(bool((index >> k) & 1))) for k, a in enumerate(fit(idx, cw))))
            out.append((p, sel, bit))
        return out


def _is_dynamic(node: A.Node, params) -> bool:
    try:
        const_eval(node, params)
        return False
    except Exception:
        return True


def _case_to_if(stmt: A.Case) -> A.Stmt:
    result = stmt.default
    for labels, body in reversed(stmt.items):
        cond: A.Node | None = None
        for lbl in labels:
            eq = A.Binary("==", stmt.subject, lbl)
            cond = eq if cond is None else A.Binary("||", cond, eq)
        result = A.If(cond, body, result)
    return result if result is not None else A.Block(())


def _reset_branch(body: A.Stmt, scope: Scope, inputs: set[str]) -> A.Stmt | None:
    """The branch taken under reset, if ``body`` is a top-level reset ``if``."""
    while isinstance(body, A.Block) and len(body.stmts) == 1:
        body = body.stmts[0]
    if not isinstance(body, A.If):
        return None
    try:
        cond = truth(body.cond, scope)
    except Exception:
        return None
    sup = {n for n, _ in E.support(cond)}
    if len(sup) != 1 or not sup <= inputs:
        return None
    return body.then


def _image(defs: dict[str, E.Expr]) -> E.Expr:
    """Exact set of values ``{v: f_v(x)}`` as ``x`` ranges over all valuations.

    Bits are grouped by shared support and each group is enumerated; a
    group whose support exceeds ``IMAGE_SUPPORT_CAP`` is left unconstrained.
    """
    names = list(defs)
    supports = {n: {s for s, _ in E.support(defs[n])} for n in names}
    parent = {n: n for n in names}

    def find(n: str) -> str:
        while parent[n] != n:
            parent[n] = parent[parent[n]]
            n = parent[n]
        return n

    owner: dict[str, str] = {}
    for n in names:
        for s in supports[n]:
            if s in owner:
                parent[find(n)] = find(owner[s])
            else:
                owner[s] = n
    groups: dict[str, list[str]] = {}
    for n in names:
        groups.setdefault(find(n), []).append(n)
    parts = []
    for members in groups.values():
        sup = sorted(set().union(*(supports[m] for m in members)))
        if len(sup) > IMAGE_SUPPORT_CAP:
            log.warning("initial-state image of %s left unconstrained (support %d)", members, len(sup))
            continue
        slots = {(s, False): ("c", k) for k, s in enumerate(sup)}
        fn = E.compile_py([defs[m] for m in members], slots)
        images = {fn(tuple((code >> k) & 1 for k in range(len(sup))), (), ())
                  for code in range(1 << len(sup))}
        if len(images) == 1 << len(members):
            continue
        lits = lambda img: E.and_(*(E.var(m) if b else E.not_(E.var(m)) for m, b in zip(members, img)))
        parts.append(E.or_(*(lits(img) for img in sorted(images))))
    return E.and_(*parts)


def elaborate(design: A.DesignAst) -> TransitionSystem:
    """Build the transition system of a parsed design."""
    params = {n: (v.value, v.width or 32) for n, v in design.params.items()}
    clock = design.clock
    driven_by_assign = {ca.target.name for ca in design.assigns}
    regs: dict[str, A.Decl] = {}
    inputs: list[A.Decl] = []
    ranges: dict[str, tuple[int, int]] = {}
    for decl in design.decls.values():
        ranges[decl.name] = (decl.msb, decl.lsb)
        if decl.direction == "input":
            if decl.name != clock:
                inputs.append(decl)
        elif decl.is_reg and decl.name not in driven_by_assign:
            regs[decl.name] = decl
    for name in driven_by_assign:
        if name not in design.decls:
            raise UnknownSignal(f"unknown signal {name!r}")
        if design.decls[name].direction == "input":
            raise ElaborationError(f"continuous assignment to input {name!r}")

    var_names: list[str] = []
    source_map: dict[str, tuple[str, int]] = {}
    base: dict[str, tuple[E.Expr, ...]] = {}
    for decl in regs.values():
        names = bit_names(decl)
        var_names.extend(names)
        base[decl.name] = tuple(E.var(n) for n in names)
        for p, n in enumerate(names):
            source_map[n] = (decl.name, p)
    input_names: list[str] = []
    for decl in inputs:
        names = bit_names(decl)
        input_names.extend(names)
        base[decl.name] = tuple(E.var(n) for n in names)
    wires = _Wires(base, design, params, ranges)

    owners: dict[str, int] = {}
    next_bits: dict[str, list[E.Expr]] = {n: list(b) for n, b in base.items() if n in regs}
    reset_frames: list[_Frame] = []
    input_set = set(input_names)
    for k, blk in enumerate(design.always):
        if blk.events[0][1] != clock:
            raise ElaborationError("always block not clocked by the design clock", blk.pos)
        ex = _Executor(design, wires, regs, params, ranges)
        frame = ex.run(blk.body, _Frame({n: list(base[n]) for n in regs}))
        for name in ex.assigned:
            if name in owners:
                raise ElaborationError(f"register {name!r} is driven by more than one always block", blk.pos)
            owners[name] = k
            nba = frame.nba.get(name, [None] * regs[name].width)
            next_bits[name] = [b if slot is None else E.ite(slot[0], slot[1], b)
                               for b, slot in zip(frame.blk[name], nba)]
        branch = _reset_branch(blk.body, Scope(wires, ranges, params), input_set)
        if branch is not None:
            rex = _Executor(design, wires, regs, params, ranges)
            reset_frames.append(rex.run(branch, _Frame({n: list(base[n]) for n in regs})))

    next_state = {}
    for name in regs:
        for n, f in zip(bit_names(regs[name]), next_bits[name]):
            next_state[n] = f
    trans = E.conj(E.iff(E.var(v, True), next_state[v]) for v in var_names)
    init = _initial_states(design, regs, base, wires, params, ranges, reset_frames)

    signals = {name: wires[name] for name in wires}
    for name, (value, w) in params.items():
        signals.setdefault(name, tuple(E.const(bool((value >> p) & 1)) for p in range(w)))
    return TransitionSystem(
        vars=tuple(var_names),
        inputs=tuple(input_names),
        init=init,
        trans=trans,
        source_map=source_map,
        next_state=next_state,
        signals=signals,
        ranges=ranges,
        clock=clock,
    )


def _initial_states(design, regs, base, wires, params, ranges, reset_frames) -> E.Expr:
    has_initializers = bool(design.initials) or any(d.init is not None for d in regs.values())
    defs: dict[str, E.Expr] = {}
    if has_initializers:
        frame = _Frame({n: list(base[n]) for n in regs})
        scope = Scope(ChainMap(frame.blk, wires), ranges, params)
        for decl in regs.values():
            if decl.init is not None:
                frame.blk[decl.name] = fit(lower(decl.init, max(width(decl.init, scope), decl.width), scope),
                                           decl.width)
        ex = _Executor(design, wires, regs, params, ranges)
        for stmt in design.initials:
            frame = ex.run(stmt, frame)
        frames = [frame]
    else:
        frames = reset_frames
    if not frames:
        return E.TRUE
    for frame in frames:
        for name in regs:
            nba = frame.nba.get(name, [None] * regs[name].width)
            for n, b, slot in zip(bit_names(regs[name]), frame.blk[name], nba):
                value = b if slot is None else E.ite(slot[0], slot[1], b)
                if value is not E.var(n):
                    defs[n] = value
    # Unassigned bits keep their arbitrary pre-reset value: leave them out.
    # Inputs and pre-reset register values are existentially quantified by
    # the image computation, so they must not clash with the state names.
    renamed = {n: E.substitute(f, {(v, False): E.var(f"$pre:{v}") for v, _ in E.support(f)})
               for n, f in defs.items()}
    return _image(renamed)
