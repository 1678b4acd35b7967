"""Bit-level transition systems and the explicit-state oracle.

A :class:`TransitionSystem` is ``(vars, inputs, init, trans)`` over boolean
variables. ``trans`` may reference current state, inputs and primed state.
Safe predicates may read current-frame inputs too; a state violates a
predicate if *some* input valuation falsifies it (inputs are free in every
frame).

The explicit-state routines here (:func:`successors`,
:func:`brute_force_check`) never touch the SAT encoding; they exist to
cross-check the symbolic checker.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from functools import cached_property

from . import expr as E
from .errors import StateSpaceTooLarge, UnboundVariable, WellFormednessError

DEFAULT_BIT_CAP = 20
DEFAULT_STATE_CAP = 2_000_000


@dataclass(frozen=True)
class State:
    """Total assignment of a system's state variables, in declaration order."""

    items: tuple[tuple[str, int], ...]

    @classmethod
    def of(cls, ts: TransitionSystem, values: Mapping[str, int]) -> State:
        if set(values) != set(ts.vars):
            missing = sorted(set(ts.vars) - set(values))
            extra = sorted(set(values) - set(ts.vars))
            raise WellFormednessError(f"state domain mismatch: missing={missing} extra={extra}")
        return cls(tuple((v, int(bool(values[v]))) for v in ts.vars))

    @classmethod
    def from_bits(cls, ts: TransitionSystem, bits: Iterable[int]) -> State:
        return cls(tuple(zip(ts.vars, (int(b) for b in bits))))

    def __getitem__(self, name: str) -> int:
        for k, v in self.items:
            if k == name:
                return v
        raise KeyError(name)

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(v for _, v in self.items)

    def as_dict(self) -> dict[str, int]:
        return dict(self.items)


@dataclass(frozen=True)
class TraceStep:
    state: State
    inputs: tuple[tuple[str, int], ...]

    def as_dict(self) -> dict:
        return {"state": self.state.as_dict(), "inputs": dict(self.inputs)}


@dataclass(frozen=True, eq=False)
class TransitionSystem:
    vars: tuple[str, ...]
    inputs: tuple[str, ...]
    init: E.Expr
    trans: E.Expr
    # register name -> (hdl signal, bit index); monitors map to themselves
    source_map: Mapping[str, tuple[str, int]] = field(default_factory=dict)
    # functional next-state equations implied by ``trans`` (optional)
    next_state: Mapping[str, E.Expr] | None = None
    # hdl signal name -> LSB-first bit formulas over vars and inputs
    signals: Mapping[str, tuple[E.Expr, ...]] = field(default_factory=dict)
    # hdl signal name -> declared (msb, lsb)
    ranges: Mapping[str, tuple[int, int]] = field(default_factory=dict)
    clock: str | None = None

    def __post_init__(self) -> None:
        names = list(self.vars) + list(self.inputs)
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise WellFormednessError(f"duplicate variable names: {dup}")
        vs, ins = set(self.vars), set(self.inputs)
        for name, primed in E.support(self.init):
            if primed or name not in vs:
                raise WellFormednessError(f"init references non-state variable {name!r}")
        for name, primed in E.support(self.trans):
            if primed and name not in vs:
                raise WellFormednessError(f"trans primes unknown state variable {name!r}")
            if not primed and name not in vs and name not in ins:
                raise WellFormednessError(f"trans references undeclared variable {name!r}")

    @cached_property
    def var_index(self) -> dict[str, int]:
        return {v: k for k, v in enumerate(self.vars)}

    @cached_property
    def input_index(self) -> dict[str, int]:
        return {v: k for k, v in enumerate(self.inputs)}

    def slots(self) -> dict[tuple[str, bool], tuple[str, int]]:
        out: dict[tuple[str, bool], tuple[str, int]] = {}
        for k, v in enumerate(self.vars):
            out[(v, False)] = ("c", k)
            out[(v, True)] = ("n", k)
        for k, v in enumerate(self.inputs):
            out[(v, False)] = ("i", k)
        return out

    @cached_property
    def _init_fn(self):
        return E.compile_py([self.init], self.slots())

    @cached_property
    def _trans_fn(self):
        return E.compile_py([self.trans], self.slots())

    @cached_property
    def _next_fn(self):
        if self.next_state is None or set(self.next_state) != set(self.vars):
            return None
        return E.compile_py([self.next_state[v] for v in self.vars], self.slots())

    @cached_property
    def trans_is_functional_only(self) -> bool:
        """True when ``trans`` is exactly the conjunction of next-state equations."""
        if self._next_fn is None:
            return False
        eqs = E.conj(E.iff(E.var(v, True), self.next_state[v]) for v in self.vars)
        return eqs is self.trans

    def state(self, **values: int) -> State:
        return State.of(self, values)

    def input_valuations(self, cap: int = DEFAULT_BIT_CAP) -> list[tuple[int, ...]]:
        if len(self.inputs) > cap:
            raise StateSpaceTooLarge(f"{len(self.inputs)} input bits exceed the cap of {cap}")
        return list(itertools.product((0, 1), repeat=len(self.inputs)))


def eval_formula(formula: E.Expr, current: State | Mapping[str, int],
                 next: State | Mapping[str, int] | None = None,
                 inputs: Mapping[str, int] | None = None) -> bool:
    """Evaluate ``formula`` under a current state, optional next state and inputs."""
    cur = current.as_dict() if isinstance(current, State) else dict(current)
    nxt = next.as_dict() if isinstance(next, State) else (dict(next) if next is not None else {})
    ins = dict(inputs or {})
    lookup: dict[tuple[str, bool], bool] = {}
    for name, primed in E.support(formula):
        if primed:
            if name not in nxt:
                raise UnboundVariable(f"{name}'")
            lookup[(name, True)] = bool(nxt[name])
        elif name in cur:
            lookup[(name, False)] = bool(cur[name])
        elif name in ins:
            lookup[(name, False)] = bool(ins[name])
        else:
            raise UnboundVariable(name)
    return E.evaluate(formula, lookup)


def _next_states(ts: TransitionSystem, c: tuple[int, ...], i: tuple[int, ...]) -> list[tuple[int, ...]]:
    if ts._next_fn is not None:
        t = tuple(int(b) for b in ts._next_fn(c, (), i))
        if ts.trans_is_functional_only or ts._trans_fn(c, t, i)[0]:
            return [t]
        return []
    if len(ts.vars) > DEFAULT_BIT_CAP:
        raise StateSpaceTooLarge("relational successor enumeration over too many state bits")
    return [t for t in itertools.product((0, 1), repeat=len(ts.vars)) if ts._trans_fn(c, t, i)[0]]


def successors(ts: TransitionSystem, s: State, cap: int = DEFAULT_BIT_CAP) -> set[State]:
    """All states reachable from ``s`` in one step, over every input valuation."""
    if tuple(k for k, _ in s.items) != ts.vars:
        raise WellFormednessError("state does not belong to this system")
    out: set[State] = set()
    for i in ts.input_valuations(cap):
        for t in _next_states(ts, s.bits, i):
            out.add(State.from_bits(ts, t))
    return out


def initial_states(ts: TransitionSystem, cap: int = DEFAULT_BIT_CAP) -> list[tuple[int, ...]]:
    if len(ts.vars) > cap:
        raise StateSpaceTooLarge(f"{len(ts.vars)} state bits exceed the cap of {cap}")
    f = ts._init_fn
    return [c for c in itertools.product((0, 1), repeat=len(ts.vars)) if f(c, (), ())[0]]


@dataclass(frozen=True)
class BruteForceResult:
    status: str  # "holds" | "violated" | "cap_exceeded"
    trace: tuple[TraceStep, ...] = ()
    visited: int = 0
    diameter: int = 0

    @property
    def holds(self) -> bool:
        return self.status == "holds"


def _violating_input(safe_fn, c, valuations):
    for i in valuations:
        if not safe_fn(c, (), i)[0]:
            return i
    return None


def brute_force_check(ts: TransitionSystem, safe: E.Expr, cap: int = DEFAULT_STATE_CAP,
                      bit_cap: int = DEFAULT_BIT_CAP, max_depth: int | None = None) -> BruteForceResult:
    """Breadth-first reachability; returns a shortest violating trace if any.

    ``diameter`` is the depth of the deepest BFS layer explored. With
    ``max_depth`` only states at distance ``<= max_depth`` are examined.
    """
    if len(ts.vars) + len(ts.inputs) > bit_cap:
        raise StateSpaceTooLarge(
            f"{len(ts.vars)}+{len(ts.inputs)} state+input bits exceed the cap of {bit_cap}")
    safe_fn = E.compile_py([safe], ts.slots())
    reads_inputs = any(not p and n in ts.input_index for n, p in E.support(safe))
    valuations = ts.input_valuations(bit_cap)
    check_vals = valuations if reads_inputs else valuations[:1]

    parent: dict[tuple[int, ...], tuple[tuple[int, ...], tuple[int, ...]] | None] = {}
    frontier: list[tuple[int, ...]] = []
    for c in initial_states(ts, bit_cap):
        parent[c] = None
        frontier.append(c)
    depth = 0
    while frontier:
        for c in frontier:
            bad = _violating_input(safe_fn, c, check_vals)
            if bad is not None:
                return BruteForceResult("violated", _rebuild(ts, parent, c, bad), len(parent), depth)
        if max_depth is not None and depth >= max_depth:
            break
        nxt: list[tuple[int, ...]] = []
        for c in frontier:
            for i in valuations:
                for t in _next_states(ts, c, i):
                    if t not in parent:
                        parent[t] = (c, i)
                        nxt.append(t)
                        if len(parent) > cap:
                            return BruteForceResult("cap_exceeded", (), len(parent), depth)
        if not nxt:
            break
        frontier = nxt
        depth += 1
    return BruteForceResult("holds", (), len(parent), depth)


def _rebuild(ts, parent, last, bad_inputs) -> tuple[TraceStep, ...]:
    steps: list[TraceStep] = []
    node, inputs = last, bad_inputs
    while True:
        steps.append(TraceStep(State.from_bits(ts, node), tuple(zip(ts.inputs, inputs))))
        link = parent[node]
        if link is None:
            break
        node, inputs = link
    steps.reverse()
    return tuple(steps)


def reachable_layers(ts: TransitionSystem, depth: int, bit_cap: int = DEFAULT_BIT_CAP) -> list[set[tuple[int, ...]]]:
    """States reachable in exactly ``d`` steps, for ``d = 0..depth``."""
    layers = [set(initial_states(ts, bit_cap))]
    valuations = ts.input_valuations(bit_cap)
    for _ in range(depth):
        nxt: set[tuple[int, ...]] = set()
        for c in layers[-1]:
            for i in valuations:
                nxt.update(_next_states(ts, c, i))
        layers.append(nxt)
    return layers


def replay(ts: TransitionSystem, trace: Iterable[TraceStep], safe: E.Expr) -> bool:
    """True iff ``trace`` starts in Init, follows ``trans``, and violates ``safe`` only at its end."""
    steps = list(trace)
    if not steps:
        return False
    if not eval_formula(ts.init, steps[0].state):
        return False
    for a, b in zip(steps, steps[1:]):
        if not eval_formula(ts.trans, a.state, b.state, dict(a.inputs)):
            return False
    for k, step in enumerate(steps):
        ok = eval_formula(safe, step.state, None, dict(step.inputs))
        if ok != (k < len(steps) - 1):
            return False
    return True
