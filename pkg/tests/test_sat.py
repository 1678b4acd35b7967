from __future__ import annotations

import itertools
import sys
import textwrap

import pytest
from hypothesis import given, strategies as st

from helpers import assignments, fixture, formulas
from lemmamine import expr as E
from lemmamine.checker.cnf import Cnf, Encoder, bitblast
from lemmamine.checker.dimacs import parse_output, solve_external
from lemmamine.checker.sat import SolveStatus, luby, solve
from lemmamine.errors import SolverCrash
from lemmamine.ts import eval_formula


def brute_sat(cnf: Cnf) -> bool:
    for bits in itertools.product((False, True), repeat=cnf.num_vars):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in cnf.clauses):
            return True
    return False


def satisfies(model, cnf: Cnf) -> bool:
    return all(any(model[abs(l)] == (l > 0) for l in c) for c in cnf.clauses)


def pigeonhole(pigeons: int, holes: int) -> Cnf:
    var = lambda p, h: p * holes + h + 1  # noqa: E731
    clauses = [tuple(var(p, h) for h in range(holes)) for p in range(pigeons)]
    for h in range(holes):
        for p, q in itertools.combinations(range(pigeons), 2):
            clauses.append((-var(p, h), -var(q, h)))
    return Cnf(pigeons * holes, clauses)


def test_luby_prefix():
    assert [luby(i) for i in range(1, 16)] == [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]


def test_trivial_instances():
    assert solve(Cnf(0, [])).status is SolveStatus.SAT
    assert solve(Cnf(1, [()])).status is SolveStatus.UNSAT
    assert solve(Cnf(1, [(1,), (-1,)])).status is SolveStatus.UNSAT


def test_unit_propagation_chain():
    n = 30
    clauses = [(1,)] + [(-k, k + 1) for k in range(1, n)]
    res = solve(Cnf(n, clauses))
    assert res.sat and all(res.model[k] for k in range(1, n + 1))


@pytest.mark.parametrize("holes", [2, 3, 4])
def test_pigeonhole_unsat(holes):
    assert solve(pigeonhole(holes + 1, holes)).status is SolveStatus.UNSAT


def test_pigeonhole_with_room_is_sat():
    cnf = pigeonhole(4, 4)
    res = solve(cnf)
    assert res.sat and satisfies(res.model, cnf)


def test_literal_range_checked():
    with pytest.raises(ValueError):
        Cnf(2, [(3,)])


def test_dimacs_round_trip():
    cnf = Cnf(3, [(1, -2), (2, 3), (-1,)])
    back = Cnf.from_dimacs("c comment\n" + cnf.to_dimacs())
    assert back.num_vars == 3 and back.clauses == cnf.clauses


clauses3 = st.lists(
    st.lists(st.integers(1, 8).flatmap(lambda v: st.sampled_from([v, -v])), min_size=1, max_size=3),
    min_size=1, max_size=40)


@given(st.integers(3, 8), clauses3, st.integers(0, 5))
def test_cdcl_agrees_with_brute_force(n, clauses, seed):
    clauses = [tuple(l for l in c if abs(l) <= n) or (1,) for c in clauses]
    cnf = Cnf(n, clauses)
    res = solve(cnf, seed=seed)
    assert res.sat == brute_sat(cnf)
    if res.sat:
        assert satisfies(res.model, cnf)


@given(clauses3)
def test_models_are_deterministic(clauses):
    cnf = Cnf(8, [tuple(c) for c in clauses])
    assert solve(cnf).model == solve(cnf).model


@given(formulas(["a", "b", "c"]))
def test_tseitin_is_equisatisfiable(pair):
    f, _ = pair
    cnf, vmap = bitblast(f)
    truth = any(E.evaluate(f, {(k, False): v for k, v in env.items()}) for env in assignments(["a", "b", "c"]))
    res = solve(cnf)
    assert res.sat == truth
    if res.sat:
        env = {(n, False): res.model[v] for (n, fr), v in vmap.items()}
        for n in ("a", "b", "c"):
            env.setdefault((n, False), False)
        assert E.evaluate(f, env)


def test_encoder_frames_are_distinct_variables():
    enc = Encoder()
    p = enc.encode(E.var("a"), 0)
    q = enc.encode(E.var("a", True), 0)
    assert p != q and q == enc.encode(E.var("a"), 1)


def test_parse_output_conventions():
    res = parse_output("s SATISFIABLE\nv 1 -2 0\n", 10, 2)
    assert res.sat and res.model == {1: True, 2: False}
    assert parse_output("s UNSATISFIABLE\n", 20, 2).status is SolveStatus.UNSAT
    assert parse_output("", 20, 2).status is SolveStatus.UNSAT
    with pytest.raises(SolverCrash):
        parse_output("garbage", 1, 2)


def test_external_solver_round_trip(tmp_path):
    script = tmp_path / "fake_solver.py"
    script.write_text(textwrap.dedent("""
        import itertools, sys
        text = open(sys.argv[1]).read().split("\\n")
        n = int(text[0].split()[2])
        cls = [[int(t) for t in l.split()[:-1]] for l in text[1:] if l.strip()]
        for bits in itertools.product((0, 1), repeat=n):
            if all(any((bits[abs(x) - 1] == 1) == (x > 0) for x in c) for c in cls):
                print("s SATISFIABLE")
                print("v " + " ".join(str(k + 1 if b else -(k + 1)) for k, b in enumerate(bits)) + " 0")
                sys.exit(10)
        print("s UNSATISFIABLE")
        sys.exit(20)
    """))
    command = f"{sys.executable} {script}"
    sat = solve_external(Cnf(2, [(1, 2), (-1,)]), command, timeout=30)
    assert sat.sat and sat.model == {1: False, 2: True}
    assert solve_external(pigeonhole(3, 2), command, timeout=30).status is SolveStatus.UNSAT


def test_external_solver_missing_binary():
    with pytest.raises(SolverCrash):
        solve_external(Cnf(1, [(1,)]), "/nonexistent/solver")


def test_arbiter_transition_models_match_enumeration():
    ts = fixture("arbiter").ts
    cnf, vmap = bitblast(ts.trans, frame=0)
    assert len(ts.vars) + len(ts.inputs) == 8
    for bits in itertools.product((0, 1), repeat=8):
        cur = dict(zip(ts.vars, bits[:len(ts.vars)]))
        ins = dict(zip(ts.inputs, bits[len(ts.vars):]))
        expected = {nxt for nxt in itertools.product((0, 1), repeat=len(ts.vars))
                    if eval_formula(ts.trans, cur, dict(zip(ts.vars, nxt)), ins)}
        units = [(vmap[(n, 0)] if v else -vmap[(n, 0)],) for n, v in {**cur, **ins}.items() if (n, 0) in vmap]
        clauses = list(cnf.clauses) + units
        found = set()
        while True:
            res = solve(Cnf(cnf.num_vars, clauses))
            if res.status is not SolveStatus.SAT:
                break
            nxt = tuple(int(res.model[vmap[(n, 1)]]) for n in ts.vars)
            found.add(nxt)
            clauses.append(tuple(-vmap[(n, 1)] if b else vmap[(n, 1)] for n, b in zip(ts.vars, nxt)))
        assert found == expected
