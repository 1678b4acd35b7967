"""Bounded model checking, k-induction and strengthening certificates."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum

from .. import expr as E
from ..props import CompiledProperty, conjoin
from ..ts import State, TraceStep, TransitionSystem
from .cnf import Encoder
from .dimacs import solve_external
from .sat import SolveResult, SolveStatus, solve

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckBudget:
    timeout: float = 30.0
    bmc_bound: int = 30
    k: int = 1
    external_solver: str | None = None

    def __post_init__(self) -> None:
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")
        if self.bmc_bound < 1:
            raise ValueError("bmc_bound must be at least 1")
        if self.k < 1:
            raise ValueError("k must be at least 1")


class Status(str, Enum):
    INDUCTIVE = "inductive"
    HOLDS_TO_BOUND = "holds_to_bound"
    FALSIFIED = "falsified"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class CheckVerdict:
    status: Status
    bound: int | None = None
    trace: tuple[TraceStep, ...] = ()
    reason: str | None = None

    @property
    def depth(self) -> int:
        """Number of frames in the counterexample (0 when there is none)."""
        return len(self.trace)

    def as_dict(self, with_trace: bool = True) -> dict:
        out: dict = {"status": self.status.value}
        if self.bound is not None:
            out["bound"] = self.bound
        if self.reason is not None:
            out["reason"] = self.reason
        if self.trace:
            out["depth"] = self.depth
            if with_trace:
                out["trace"] = [s.as_dict() for s in self.trace]
        return out


def inductive() -> CheckVerdict:
    return CheckVerdict(Status.INDUCTIVE)


def _solve(enc: Encoder, budget: CheckBudget) -> SolveResult:
    cnf = enc.cnf()
    if budget.external_solver:
        return solve_external(cnf, budget.external_solver, budget.timeout)
    return solve(cnf, budget.timeout)


def _declare_frames(enc: Encoder, system: TransitionSystem, frames: int) -> None:
    for f in range(frames):
        for v in system.vars:
            enc.lit(v, f)
        for i in system.inputs:
            enc.lit(i, f)


def _trace(enc: Encoder, system: TransitionSystem, model: dict[int, bool], frames: int) -> tuple[TraceStep, ...]:
    steps = []
    for f in range(frames):
        state = State(tuple((v, int(model[enc.var_map[(v, f)]])) for v in system.vars))
        inputs = tuple((i, int(model[enc.var_map[(i, f)]])) for i in system.inputs)
        steps.append(TraceStep(state, inputs))
    return tuple(steps)


def _bounded_query(system: TransitionSystem, safe: E.Expr, last: int, budget: CheckBudget):
    """Init ∧ Tr^last ∧ (¬safe@0 ∨ … ∨ ¬safe@last)."""
    enc = Encoder()
    _declare_frames(enc, system, last + 1)
    enc.assert_formula(system.init, 0)
    for f in range(last):
        enc.assert_formula(system.trans, f)
    bad = E.not_(safe)
    enc.add_clause(enc.encode(bad, f) for f in range(last + 1))
    return enc, _solve(enc, budget)


def bmc_safe(system: TransitionSystem, safe: E.Expr, budget: CheckBudget, bound: int | None = None) -> CheckVerdict:
    """Search initialized paths with frames ``0..bound`` for a violation of ``safe``.

    One query covers the whole bound; only when it is satisfiable is the
    least violating frame located by bisection, so the reported trace is
    always a shortest one.
    """
    n = budget.bmc_bound if bound is None else bound
    enc, res = _bounded_query(system, safe, n, budget)
    if res.status is SolveStatus.TIMEOUT:
        return CheckVerdict(Status.UNKNOWN, reason="timeout")
    if res.status is SolveStatus.UNSAT:
        return CheckVerdict(Status.HOLDS_TO_BOUND, bound=n)
    lo, hi = 0, n
    best = (enc, res, n)
    while lo < hi:
        mid = (lo + hi) // 2
        e2, r2 = _bounded_query(system, safe, mid, budget)
        if r2.status is SolveStatus.TIMEOUT:
            return CheckVerdict(Status.UNKNOWN, reason="timeout")
        if r2.sat:
            hi = mid
            best = (e2, r2, mid)
        else:
            lo = mid + 1
    enc, res, last = best
    if last != hi:
        enc, res = _bounded_query(system, safe, hi, budget)
    return CheckVerdict(Status.FALSIFIED, trace=_trace(enc, system, res.model, hi + 1))


def _step_query(system: TransitionSystem, safe: E.Expr, k: int, budget: CheckBudget) -> SolveResult:
    """safe@0..k-1 ∧ Tr^k ∧ ¬safe@k over unconstrained frames."""
    enc = Encoder()
    _declare_frames(enc, system, k + 1)
    for f in range(k):
        enc.assert_formula(safe, f)
        enc.assert_formula(system.trans, f)
    enc.assert_formula(E.not_(safe), k)
    if k >= 2:
        for a in range(k + 1):
            for b in range(a + 1, k + 1):
                diffs = []
                for v in system.vars:
                    x = enc.new_var()
                    va, vb = enc.var_map[(v, a)], enc.var_map[(v, b)]
                    enc.add_clause((-x, va, vb))
                    enc.add_clause((-x, -va, -vb))
                    diffs.append(x)
                enc.add_clause(diffs)
    return _solve(enc, budget)


def _base_and_step(system: TransitionSystem, safe: E.Expr, budget: CheckBudget) -> tuple[CheckVerdict | None, SolveResult]:
    base = bmc_safe(system, safe, budget, bound=budget.k - 1)
    if base.status is not Status.HOLDS_TO_BOUND:
        return base, SolveResult(SolveStatus.UNSAT)
    return None, _step_query(system, safe, budget.k, budget)


def kinduction_safe(system: TransitionSystem, safe: E.Expr, budget: CheckBudget) -> CheckVerdict:
    failed, step = _base_and_step(system, safe, budget)
    if failed is not None:
        return failed
    if step.status is SolveStatus.UNSAT:
        return inductive()
    if step.status is SolveStatus.TIMEOUT:
        return CheckVerdict(Status.UNKNOWN, reason="timeout")
    return bmc_safe(system, safe, budget)


def bmc(prop: CompiledProperty, budget: CheckBudget) -> CheckVerdict:
    return bmc_safe(prop.system, prop.safe, budget)


def kinduction(prop: CompiledProperty, budget: CheckBudget) -> CheckVerdict:
    """k-induction; a failed step check is downgraded to the BMC verdict."""
    return kinduction_safe(prop.system, prop.safe, budget)


class CertStatus(str, Enum):
    CERTIFIED = "certified"
    NOT_INDUCTIVE = "not_inductive"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Certificate:
    status: CertStatus
    lemmas: tuple[str, ...] = ()
    failed: str | None = None  # "initiation" | "consecution" | None
    k: int = 1
    extra: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.status is CertStatus.CERTIFIED

    def as_dict(self) -> dict:
        out = {"status": self.status.value, "lemmas": list(self.lemmas), "k": self.k}
        if self.failed:
            out["failed"] = self.failed
        return out


def check_strengthening(prop: CompiledProperty, lemmas: Sequence[CompiledProperty],
                        budget: CheckBudget) -> Certificate:
    """Is ``(∧ lemmas) ∧ prop`` an inductive invariant (initiation + consecution)?"""
    combined = conjoin([*lemmas, prop])
    names = tuple(l.text for l in lemmas)
    failed, step = _base_and_step(combined.system, combined.safe, budget)
    if failed is not None:
        if failed.status is Status.UNKNOWN:
            return Certificate(CertStatus.UNKNOWN, names, "initiation", budget.k)
        return Certificate(CertStatus.NOT_INDUCTIVE, names, "initiation", budget.k)
    if step.status is SolveStatus.UNSAT:
        return Certificate(CertStatus.CERTIFIED, names, None, budget.k)
    if step.status is SolveStatus.TIMEOUT:
        return Certificate(CertStatus.UNKNOWN, names, "consecution", budget.k)
    return Certificate(CertStatus.NOT_INDUCTIVE, names, "consecution", budget.k)
