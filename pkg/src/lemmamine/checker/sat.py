"""Built-in CDCL SAT solver.

Two-watched-literal propagation, first-UIP learning with local clause
minimization, VSIDS decisions through a lazy binary heap, phase saving,
Luby restarts and LBD-based learnt-clause reduction. There is no
randomness beyond an optional seed that perturbs initial activities, so
identical CNFs give identical models.
"""

from __future__ import annotations

import heapq
import random
import time
from dataclasses import dataclass
from enum import Enum

from .cnf import Cnf


class SolveStatus(Enum):
    SAT = "sat"
    UNSAT = "unsat"
    TIMEOUT = "timeout"


@dataclass
class SolveResult:
    status: SolveStatus
    model: dict[int, bool] | None = None
    conflicts: int = 0
    decisions: int = 0

    @property
    def sat(self) -> bool:
        return self.status is SolveStatus.SAT


def luby(i: int) -> int:
    """i-th element (1-based) of the Luby sequence 1 1 2 1 1 2 4 ..."""
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while True:
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1


def _L(lit: int) -> int:
    return 2 * lit if lit > 0 else -2 * lit + 1


class CdclSolver:
    def __init__(self, cnf: Cnf, seed: int = 0, restart_base: int = 100, var_decay: float = 0.95):
        n = cnf.num_vars
        self.n = n
        self.val = [0] * (2 * n + 2)
        self.level = [0] * (n + 1)
        self.reason: list[list[int] | None] = [None] * (n + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.watches: list[list[list[int]]] = [[] for _ in range(2 * n + 2)]
        self.originals: list[list[int]] = []
        self.learnts: list[list[int]] = []
        self.lbd: dict[int, int] = {}
        self.activity = [0.0] * (n + 1)
        self.var_inc = 1.0
        self.var_decay = var_decay
        self.phase = [False] * (n + 1)
        self.seen = [False] * (n + 1)
        self.restart_base = restart_base
        self.ok = True
        if seed:
            rng = random.Random(seed)
            for v in range(1, n + 1):
                self.activity[v] = rng.random() * 1e-5
        self.heap = [(-self.activity[v], v) for v in range(1, n + 1)]
        heapq.heapify(self.heap)
        for clause in cnf.clauses:
            if not self._add_original(clause):
                self.ok = False
                break

    # -- assignment -------------------------------------------------------

    def _value(self, lit: int) -> int:
        return self.val[_L(lit)]

    def _enqueue(self, lit: int, reason: list[int] | None) -> None:
        v = lit if lit > 0 else -lit
        self.val[_L(lit)] = 1
        self.val[_L(-lit)] = -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _add_original(self, clause) -> bool:
        lits: list[int] = []
        present: set[int] = set()
        for lit in clause:
            if -lit in present:
                return True
            if lit not in present:
                present.add(lit)
                lits.append(lit)
        lits = [l for l in lits if self._value(l) != -1]
        if any(self._value(l) == 1 for l in lits):
            return True
        if not lits:
            return False
        if len(lits) == 1:
            self._enqueue(lits[0], None)
            return self._propagate() is None
        self.originals.append(lits)
        self.watches[_L(lits[0])].append(lits)
        self.watches[_L(lits[1])].append(lits)
        return True

    def _propagate(self) -> list[int] | None:
        val = self.val
        watches = self.watches
        trail = self.trail
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            false_lit = -p
            ws = watches[_L(false_lit)]
            i = j = 0
            end = len(ws)
            while i < end:
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0] = c[1]
                    c[1] = false_lit
                first = c[0]
                if val[_L(first)] == 1:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    if val[_L(lk)] != -1:
                        c[1] = lk
                        c[k] = false_lit
                        watches[_L(lk)].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if val[_L(first)] == -1:
                        while i < end:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        self.qhead = len(trail)
                        return c
                    self._enqueue(first, c)
            del ws[j:]
        return None

    # -- heuristics -------------------------------------------------------

    def _bump(self, v: int) -> None:
        act = self.activity[v] + self.var_inc
        self.activity[v] = act
        if act > 1e100:
            for u in range(1, self.n + 1):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-self.activity[u], u) for u in range(1, self.n + 1) if self.val[2 * u] == 0]
            heapq.heapify(self.heap)
        elif self.val[2 * v] == 0:
            heapq.heappush(self.heap, (-act, v))

    def _pick_branch(self) -> int:
        heap = self.heap
        val = self.val
        act = self.activity
        while heap:
            neg, v = heapq.heappop(heap)
            if val[2 * v] != 0 or -neg != act[v]:
                continue
            return v if self.phase[v] else -v
        return 0

    # -- conflict analysis --------------------------------------------------

    def _analyze(self, confl: list[int]) -> tuple[list[int], int]:
        seen = self.seen
        level = self.level
        trail = self.trail
        cur = len(self.trail_lim)
        learnt = [0]
        path = 0
        p = 0
        idx = len(trail) - 1
        clause = confl
        while True:
            for q in (clause if p == 0 else clause[1:]):
                v = q if q > 0 else -q
                if not seen[v] and level[v] > 0:
                    self._bump(v)
                    seen[v] = True
                    if level[v] >= cur:
                        path += 1
                    else:
                        learnt.append(q)
            while True:
                lit = trail[idx]
                if seen[lit if lit > 0 else -lit]:
                    break
                idx -= 1
            p = trail[idx]
            idx -= 1
            v = p if p > 0 else -p
            clause = self.reason[v]
            seen[v] = False
            path -= 1
            if path == 0:
                break
        learnt[0] = -p
        # local minimization: drop literals implied by other learnt literals
        kept = [learnt[0]]
        for q in learnt[1:]:
            r = self.reason[abs(q)]
            if r is None:
                kept.append(q)
                continue
            if all(seen[abs(x)] or level[abs(x)] == 0 for x in r[1:]):
                continue
            kept.append(q)
        for q in learnt[1:]:
            seen[abs(q)] = False
        learnt = kept
        if len(learnt) == 1:
            return learnt, 0
        best = 1
        for k in range(2, len(learnt)):
            if level[abs(learnt[k])] > level[abs(learnt[best])]:
                best = k
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, level[abs(learnt[1])]

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        start = self.trail_lim[lvl]
        val = self.val
        for k in range(len(self.trail) - 1, start - 1, -1):
            lit = self.trail[k]
            v = lit if lit > 0 else -lit
            val[2 * v] = 0
            val[2 * v + 1] = 0
            self.reason[v] = None
            self.phase[v] = lit > 0
            heapq.heappush(self.heap, (-self.activity[v], v))
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)
        if len(self.heap) > 8 * self.n + 64:
            self.heap = [(-self.activity[u], u) for u in range(1, self.n + 1) if val[2 * u] == 0]
            heapq.heapify(self.heap)

    def _reduce_db(self) -> None:
        keep: list[list[int]] = []
        ranked = sorted(self.learnts, key=lambda c: (self.lbd.get(id(c), 99), len(c)))
        half = len(ranked) // 2
        for k, c in enumerate(ranked):
            if k < half or self.lbd.get(id(c), 99) <= 2:
                keep.append(c)
            else:
                self.lbd.pop(id(c), None)
        self.learnts = keep
        for ws in self.watches:
            ws.clear()
        for c in self.originals:
            self.watches[_L(c[0])].append(c)
            self.watches[_L(c[1])].append(c)
        for c in self.learnts:
            self.watches[_L(c[0])].append(c)
            self.watches[_L(c[1])].append(c)

    # -- main loop ----------------------------------------------------------

    def solve(self, timeout: float | None = None) -> SolveResult:
        if not self.ok:
            return SolveResult(SolveStatus.UNSAT)
        deadline = None if timeout is None else time.monotonic() + timeout
        conflicts = decisions = 0
        restart_no = 1
        budget = luby(restart_no) * self.restart_base
        since_restart = 0
        max_learnts = max(2000, len(self.originals) // 2)
        if self._propagate() is not None:
            self.ok = False
            return SolveResult(SolveStatus.UNSAT)
        while True:
            confl = self._propagate()
            if confl is not None:
                conflicts += 1
                since_restart += 1
                if not self.trail_lim:
                    self.ok = False
                    return SolveResult(SolveStatus.UNSAT, conflicts=conflicts, decisions=decisions)
                learnt, bt = self._analyze(confl)
                self._cancel_until(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    lvls = {self.level[abs(x)] for x in learnt}
                    self.lbd[id(learnt)] = len(lvls)
                    self.learnts.append(learnt)
                    self.watches[_L(learnt[0])].append(learnt)
                    self.watches[_L(learnt[1])].append(learnt)
                    self._enqueue(learnt[0], learnt)
                self.var_inc /= self.var_decay
                if deadline is not None and conflicts % 32 == 0 and time.monotonic() > deadline:
                    self._cancel_until(0)
                    return SolveResult(SolveStatus.TIMEOUT, conflicts=conflicts, decisions=decisions)
                continue
            if since_restart >= budget:
                self._cancel_until(0)
                restart_no += 1
                budget = luby(restart_no) * self.restart_base
                since_restart = 0
                if len(self.learnts) > max_learnts:
                    self._reduce_db()
                    max_learnts = int(max_learnts * 1.1)
                continue
            lit = self._pick_branch()
            if lit == 0:
                model = {v: self.val[2 * v] == 1 for v in range(1, self.n + 1)}
                self._cancel_until(0)
                return SolveResult(SolveStatus.SAT, model, conflicts, decisions)
            decisions += 1
            if deadline is not None and decisions % 512 == 0 and time.monotonic() > deadline:
                self._cancel_until(0)
                return SolveResult(SolveStatus.TIMEOUT, conflicts=conflicts, decisions=decisions)
            self.trail_lim.append(len(self.trail))
            self._enqueue(lit, None)


def solve(cnf: Cnf, timeout: float | None = None, seed: int = 0) -> SolveResult:
    """Decide ``cnf`` with the built-in solver."""
    return CdclSolver(cnf, seed=seed).solve(timeout)
