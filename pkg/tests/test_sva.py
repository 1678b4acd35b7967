from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from helpers import FIXTURE_NAMES, fixture
from lemmamine import expr as E
from lemmamine.checker.engine import CheckBudget, Status, bmc
from lemmamine.errors import UnsupportedTemporalDepth
from lemmamine.hdl import ast as A
from lemmamine.hdl.design import load_design
from lemmamine.hdl.parser import parse_property, print_property
from lemmamine.hdl.semantics import earliest_violation
from lemmamine.hdl.sva import LemmaContext, compile_property, compile_text, normalize_text, temporal_depth
from lemmamine.ts import brute_force_check

HORIZON = 12


def monitored_violation(design, prop: A.PropertyAst) -> int | None:
    """Earliest violating frame found by search over the monitor-extended system."""
    p = compile_property(prop, design.ts)
    res = brute_force_check(p.system, p.safe, max_depth=HORIZON - 1)
    return None if res.holds else len(res.trace) - 1


def one_bit_signals(design) -> list[str]:
    return sorted(n for n, (msb, lsb) in design.ts.ranges.items() if msb == lsb and n != "clk")


@st.composite
def bounded_properties(draw, signals: list[str], max_depth: int = 2):
    names = st.sampled_from(signals)
    atom = st.one_of(names.map(A.Ident), names.map(lambda n: A.Unary("!", A.Ident(n))))
    term = st.one_of(atom, st.builds(A.Binary, st.sampled_from(["&&", "||", "^"]), atom, atom))

    def seq(first_delay_zero: bool, budget: int):
        terms, used = [], 0
        for i in range(draw(st.integers(1, 2))):
            d = 0 if i == 0 and first_delay_zero else draw(st.integers(0 if i == 0 else 1, 1))
            if used + d > budget:
                break
            used += d
            terms.append((d, draw(term)))
        if not terms:
            terms = [(0, draw(term))]
        return A.Sequence(tuple(terms)), used

    def one():
        if draw(st.booleans()):
            ante, used = seq(True, max_depth)
            overlapping = draw(st.booleans())
            room = max_depth - used - (0 if overlapping else 1)
            if room < 0:
                overlapping, room = True, max_depth - used
            cons, _ = seq(False, room)
            return A.Implication(ante, cons, overlapping)
        return A.SeqProp(seq(False, max_depth)[0])

    body = one() if draw(st.booleans()) else A.PropAnd((one(), one()))
    disable = A.Ident("rst") if "rst" in signals and draw(st.booleans()) else None
    return A.PropertyAst(body, A.Clock("posedge", "clk"), disable)


SMALL = [n for n in FIXTURE_NAMES if len(fixture(n).ts.vars) + len(fixture(n).ts.inputs) <= 8]


@pytest.mark.parametrize("name", SMALL)
@settings(max_examples=15)
@given(data=st.data())
def test_monitor_matches_trace_semantics(name, data):
    d = fixture(name)
    prop = data.draw(bounded_properties(one_bit_signals(d)))
    assert temporal_depth(prop) <= 2
    assert monitored_violation(d, prop) == earliest_violation(d.ts, prop, HORIZON)


def test_declared_fixture_properties_match_trace_semantics():
    for name in SMALL:
        d = fixture(name)
        for pname in d.property_names:
            prop = d.ast.properties[pname]
            if temporal_depth(prop) <= 2:
                assert monitored_violation(d, prop) == earliest_violation(d.ts, prop, HORIZON), (name, pname)


DELAY = load_design("""module m(input clk, input a, input b, output reg q);
    always @(posedge clk) q <= a;
endmodule""")


def test_non_overlapping_implication_checks_the_next_cycle():
    p = compile_text("a |=> q", DELAY.ts)
    assert bmc(p, CheckBudget(bmc_bound=6)).status is Status.HOLDS_TO_BOUND
    bad = compile_text("a |-> q", DELAY.ts)
    v = bmc(bad, CheckBudget(bmc_bound=6))
    assert v.status is Status.FALSIFIED and v.depth == 1


def test_identical_chains_share_monitors():
    two = compile_text("(a |-> ##1 q) and (a |-> ##1 !b || q)", DELAY.ts)
    one = compile_text("a |-> ##1 q", DELAY.ts)
    assert len(two.monitors) == len(one.monitors) == 1
    assert two.monitors[0].name == one.monitors[0].name
    assert one.monitors[0].name.startswith("$mon_")


def test_boolean_property_has_no_monitors():
    p = compile_text("!(a && b) || q", DELAY.ts)
    assert p.monitors == () and p.depth == 0


def test_depth_cap():
    assert temporal_depth(parse_property("a ##2 b |=> ##1 q")) == 4
    compile_text("a ##2 b |=> ##1 q", DELAY.ts)
    with pytest.raises(UnsupportedTemporalDepth):
        compile_text("a ##2 b |=> ##2 q", DELAY.ts)
    compile_text("a ##2 b |=> ##2 q", DELAY.ts, LemmaContext(depth_cap=5))


def test_lemmas_inherit_the_target_disable():
    d = fixture("arbiter")
    plain = compile_text("~(ack0 && ack1)", d.ts)
    inherited = d.compile_text("~(ack0 && ack1)")
    explicit = compile_text("disable iff (rst) ~(ack0 && ack1)", d.ts)
    assert inherited.safe is explicit.safe
    assert plain.safe is not inherited.safe


def test_named_property_reference():
    d = fixture("arbiter")
    ref = d.compile_text("prop")
    assert ref.safe is d.compile().safe


def test_normalized_text():
    block = "property lemma_1;\n  @(posedge clk)   ~(ack0 ∧ ack1);\nendproperty"
    assert normalize_text(block) == "@(posedge clk) ~(ack0 && ack1)"
    assert normalize_text("assert property (a |-> b);") == "a |-> b"
    assert print_property(parse_property("a|->b")) == "a |-> b"


def test_arbiter_property_uses_one_monitor_bit():
    d = fixture("arbiter")
    p = d.compile()
    (mon,) = p.monitors
    req1, ack0, ack1, rst, pend = (E.var(n) for n in ("req1", "ack0", "ack1", "rst", mon.name))
    names = ["req1", "ack0", "ack1", "rst", mon.name]
    for bits in itertools.product((False, True), repeat=len(names)):
        env = {(n, False): b for n, b in zip(names, bits)}
        assert E.evaluate(mon.next, env) == E.evaluate(E.conj([req1, ack0, E.not_(rst)]), env)
        assert E.evaluate(p.safe, env) == E.evaluate(E.disj([E.not_(pend), ack1, rst]), env)


def test_conjunction_with_named_property():
    d = fixture("arbiter")
    lemma, prop = d.compile_text("~(ack0 && ack1)"), d.compile()
    both = d.compile_text("~(ack0 && ack1) and prop")
    assert [(m.name, m.next) for m in both.monitors] == [(m.name, m.next) for m in prop.monitors]
    names = sorted({n for n, _ in E.support(both.safe)})
    for bits in itertools.product((False, True), repeat=len(names)):
        env = {(n, False): b for n, b in zip(names, bits)}
        assert E.evaluate(both.safe, env) == E.evaluate(E.and_(lemma.safe, prop.safe), env)
