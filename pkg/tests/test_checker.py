from __future__ import annotations

from hypothesis import given, settings

from helpers import ARBITER_LEMMA, fixture, systems
from lemmamine import expr as E
from lemmamine.checker.engine import (CertStatus, CheckBudget, Status, bmc, bmc_safe, check_strengthening,
                                      kinduction, kinduction_safe)
from lemmamine.props import CompiledProperty, Monitor, boolean_property, conjoin
from lemmamine.ts import TransitionSystem, brute_force_check, replay

BUDGET = CheckBudget(timeout=30, bmc_bound=12)
x, y, i = E.var("x"), E.var("y"), E.var("i")


def functional(vars, inputs, init, nxt) -> TransitionSystem:
    trans = E.conj(E.iff(E.var(v, True), nxt[v]) for v in vars)
    return TransitionSystem(tuple(vars), tuple(inputs), init, trans, next_state=nxt)


def test_falsified_trace_is_shortest_and_replays():
    # counter x,y from 00 stepping 00 -> 10 -> 01 -> 11
    ts = functional(["x", "y"], [], E.and_(E.not_(x), E.not_(y)), {"x": E.not_(x), "y": E.xor(y, x)})
    safe = E.not_(E.and_(x, y))
    v = bmc_safe(ts, safe, BUDGET)
    assert v.status is Status.FALSIFIED and v.depth == 4
    assert replay(ts, v.trace, safe)
    assert len(brute_force_check(ts, safe).trace) == v.depth


def test_bound_limits_the_search():
    ts = functional(["x", "y"], [], E.and_(E.not_(x), E.not_(y)), {"x": E.not_(x), "y": E.xor(y, x)})
    safe = E.not_(E.and_(x, y))
    assert bmc_safe(ts, safe, BUDGET, bound=2).status is Status.HOLDS_TO_BOUND
    assert bmc_safe(ts, safe, BUDGET, bound=3).status is Status.FALSIFIED


def test_two_induction_needed():
    # y is stuck at 0 and x copies y; !x is 2-inductive but not 1-inductive
    ts = functional(["x", "y"], [], E.and_(E.not_(x), E.not_(y)), {"x": y, "y": y})
    safe = E.not_(x)
    assert kinduction_safe(ts, safe, CheckBudget(k=1)).status is Status.HOLDS_TO_BOUND
    assert kinduction_safe(ts, safe, CheckBudget(k=2)).status is Status.INDUCTIVE


def test_simple_path_constraint():
    # the unreachable safe state (x=1, y=0) loops on itself; without distinct
    # states the step check could stutter there forever
    ts = functional(["x", "y"], ["i"], E.and_(E.not_(x), E.not_(y)), {"x": x, "y": E.and_(x, i)})
    safe = E.not_(E.and_(x, y))
    assert kinduction_safe(ts, safe, CheckBudget(k=1)).status is Status.HOLDS_TO_BOUND
    assert kinduction_safe(ts, safe, CheckBudget(k=2)).status is Status.INDUCTIVE


def test_base_case_failure_is_falsified():
    ts = functional(["x"], [], x, {"x": x})
    assert kinduction_safe(ts, E.not_(x), CheckBudget(k=3)).status is Status.FALSIFIED


def test_monitor_extension():
    ts = functional(["x"], ["i"], E.not_(x), {"x": i})
    # monitor remembers the previous input; safe: current x equals it
    prop = boolean_property(ts, E.TRUE)
    mon = Monitor("$m", i)
    p = CompiledProperty(ts, E.iff(x, E.var("$m")), (mon,))
    assert p.system.vars == ("x", "$m")
    assert kinduction(p, BUDGET).status is Status.INDUCTIVE
    assert kinduction(conjoin([p, prop]), BUDGET).status is Status.INDUCTIVE


def test_arbiter_strengthening_certificates():
    d = fixture("arbiter")
    prop = d.compile()
    lemma = d.compile_text(ARBITER_LEMMA)
    assert check_strengthening(prop, [lemma], BUDGET).status is CertStatus.CERTIFIED
    empty = check_strengthening(prop, [], BUDGET)
    assert empty.status is CertStatus.NOT_INDUCTIVE and empty.failed == "consecution"
    bad = check_strengthening(prop, [d.compile_text("ack0")], BUDGET)
    assert bad.status is CertStatus.NOT_INDUCTIVE and bad.failed == "initiation"


def test_verdict_dict_omits_trace_on_request():
    d = fixture("overflow")
    v = bmc(d.compile(), CheckBudget(bmc_bound=30))
    assert v.status is Status.FALSIFIED and v.depth == 16
    assert "trace" not in v.as_dict(with_trace=False)
    assert len(v.as_dict()["trace"]) == 16


@settings(max_examples=60)
@given(systems())
def test_bmc_agrees_with_breadth_first_search(pair):
    ts, safe = pair
    v = bmc_safe(ts, safe, BUDGET)
    bfs = brute_force_check(ts, safe, max_depth=BUDGET.bmc_bound)
    assert (v.status is Status.FALSIFIED) == (bfs.status == "violated")
    if v.status is Status.FALSIFIED:
        assert v.depth == len(bfs.trace)
        assert replay(ts, v.trace, safe)


@settings(max_examples=60)
@given(systems())
def test_inductive_implies_unbounded_safety(pair):
    ts, safe = pair
    for k in (1, 2):
        if kinduction_safe(ts, safe, CheckBudget(k=k)).status is Status.INDUCTIVE:
            assert brute_force_check(ts, safe).holds


def test_arbiter_bmc_examples():
    d = fixture("arbiter")
    ack0, ack1 = E.var("ack0"), E.var("ack1")
    budget = CheckBudget(bmc_bound=30)
    assert bmc_safe(d.ts, E.not_(E.and_(ack0, ack1)), budget).status is Status.HOLDS_TO_BOUND
    v = bmc_safe(d.ts, E.not_(ack0), budget)
    assert v.status is Status.FALSIFIED and v.depth == len(brute_force_check(d.ts, E.not_(ack0)).trace) == 2
    assert bmc_safe(d.ts, E.TRUE, budget).status is Status.HOLDS_TO_BOUND


def test_arbiter_kinduction_examples():
    d = fixture("arbiter")
    budget = CheckBudget(bmc_bound=30, k=1)
    assert kinduction(d.compile(), budget).status is Status.HOLDS_TO_BOUND
    both = conjoin([d.compile_text(ARBITER_LEMMA), d.compile()])
    assert kinduction(both, budget).status is Status.INDUCTIVE
    assert kinduction_safe(d.ts, E.TRUE, budget).status is Status.INDUCTIVE


def test_false_lemma_fails_initiation():
    d = fixture("arbiter")
    cert = check_strengthening(d.compile(), [boolean_property(d.ts, E.FALSE)], BUDGET)
    assert cert.status is CertStatus.NOT_INDUCTIVE and cert.failed == "initiation"


def test_adding_true_lemma_keeps_certificate():
    d = fixture("arbiter")
    lemmas = [d.compile_text(ARBITER_LEMMA)]
    assert check_strengthening(d.compile(), lemmas, BUDGET).certified
    assert check_strengthening(d.compile(), lemmas + [boolean_property(d.ts, E.TRUE)], BUDGET).certified


def test_falsification_depth_stable_under_larger_bounds():
    d = fixture("overflow")
    prop = d.compile()
    first = bmc(prop, CheckBudget(bmc_bound=16))
    assert first.status is Status.FALSIFIED
    for n in (17, 24, 30):
        again = bmc(prop, CheckBudget(bmc_bound=n))
        assert again.depth == first.depth and again.trace == first.trace


def test_verdicts_are_deterministic():
    d = fixture("overflow")
    runs = [bmc(d.compile(), CheckBudget(bmc_bound=30)).as_dict() for _ in range(2)]
    assert runs[0] == runs[1]
