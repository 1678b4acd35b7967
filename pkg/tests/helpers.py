"""Shared test utilities: fixture designs and random formula strategies."""

from __future__ import annotations

import itertools
from functools import lru_cache
from pathlib import Path

from hypothesis import strategies as st

from lemmamine import expr as E
from lemmamine.hdl.design import Design, load_design_file
from lemmamine.ts import TransitionSystem

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "lemmamine" / "data" / "fixtures"
FIXTURE_NAMES = sorted(p.stem for p in FIXTURES.glob("*.sv"))

ARBITER_LEMMA = "~(ack0 && ack1)"
ARBITER_LEMMA_BLOCK = "property lemma_1;\n  @(posedge clk) disable iff (rst) ~(ack0 && ack1);\nendproperty"


@lru_cache(maxsize=None)
def fixture(name: str) -> Design:
    return load_design_file(FIXTURES / f"{name}.sv")


def fixture_properties():
    """(design name, property name) for every property of every fixture."""
    return [(n, p) for n in FIXTURE_NAMES for p in fixture(n).property_names]


# -- random formulas paired with an independent Python meaning ------------------------

def formulas(names, max_leaves: int = 10):
    """Strategy of ``(expr, fn)`` where ``fn(env)`` evaluates the same formula in plain Python."""
    leaves = st.sampled_from(
        [(E.var(n), (lambda n: lambda env: env[n])(n)) for n in names]
        + [(E.TRUE, lambda env: True), (E.FALSE, lambda env: False)])

    def extend(kids):
        return st.one_of(
            st.builds(lambda a: (E.not_(a[0]), lambda env: not a[1](env)), kids),
            st.builds(lambda a, b: (E.and_(a[0], b[0]), lambda env: a[1](env) and b[1](env)), kids, kids),
            st.builds(lambda a, b: (E.or_(a[0], b[0]), lambda env: a[1](env) or b[1](env)), kids, kids),
            st.builds(lambda a, b: (E.implies(a[0], b[0]), lambda env: (not a[1](env)) or b[1](env)), kids, kids),
            st.builds(lambda a, b: (E.iff(a[0], b[0]), lambda env: a[1](env) == b[1](env)), kids, kids),
            st.builds(lambda a, b: (E.xor(a[0], b[0]), lambda env: a[1](env) != b[1](env)), kids, kids),
            st.builds(lambda c, a, b: (E.ite(c[0], a[0], b[0]),
                                       lambda env: a[1](env) if c[1](env) else b[1](env)), kids, kids, kids),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


def assignments(names):
    for bits in itertools.product((False, True), repeat=len(names)):
        yield dict(zip(names, bits))


@st.composite
def systems(draw, max_vars: int = 3, max_inputs: int = 2):
    """Random functional transition systems with a random safe predicate."""
    nv = draw(st.integers(1, max_vars))
    ni = draw(st.integers(0, max_inputs))
    vs = [f"s{k}" for k in range(nv)]
    ins = [f"i{k}" for k in range(ni)]
    nxt = {v: draw(formulas(vs + ins, 6))[0] for v in vs}
    init = E.conj(E.var(v) if draw(st.booleans()) else E.not_(E.var(v)) for v in vs
                  if draw(st.booleans()))
    trans = E.conj(E.iff(E.var(v, True), nxt[v]) for v in vs)
    ts = TransitionSystem(tuple(vs), tuple(ins), init, trans, next_state=nxt)
    safe = draw(formulas(vs + ins, 6))[0]
    return ts, safe


# -- explicit-state inductiveness, independent of the SAT route -----------------------

def explicit_inductive(system: TransitionSystem, safe: E.Expr, max_bits: int = 20) -> bool:
    """Initiation and one-step consecution of ``safe`` decided by enumerating every state and input.

    ``safe`` may read current inputs, so it must hold for every input in
    every initial state, and after any step from a safe (state, input)
    pair it must hold for every next input.
    """
    nv, ni = len(system.vars), len(system.inputs)
    if nv + ni > max_bits:
        raise ValueError(f"{nv + ni} bits is too many to enumerate")
    slots = {(v, False): ("c", k) for k, v in enumerate(system.vars)}
    slots.update({(v, False): ("i", k) for k, v in enumerate(system.inputs)})
    nxt = [system.next_state[v] for v in system.vars]
    step, check, init = (E.compile_py(nxt, slots), E.compile_py([safe], slots),
                         E.compile_py([system.init], slots))
    all_inputs = list(itertools.product((False, True), repeat=ni))
    safe_everywhere = {}

    def always_safe(state) -> bool:
        if state not in safe_everywhere:
            safe_everywhere[state] = all(check(state, (), i)[0] for i in all_inputs)
        return safe_everywhere[state]

    for state in itertools.product((False, True), repeat=nv):
        if init(state, (), ())[0] and not always_safe(state):
            return False
        for i in all_inputs:
            if check(state, (), i)[0] and not always_safe(tuple(step(state, (), i))):
                return False
    return True
