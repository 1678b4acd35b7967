"""External SAT solvers driven through DIMACS files.

The CNF is written to a temporary file passed as the last argument. The
verdict follows SAT-competition conventions: an ``s SATISFIABLE`` /
``s UNSATISFIABLE`` line on stdout (or exit status 10 / 20) and ``v``
lines carrying the model.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile

from ..errors import SolverCrash
from .cnf import Cnf
from .sat import SolveResult, SolveStatus


def parse_output(stdout: str, returncode: int, num_vars: int) -> SolveResult:
    status = None
    values: list[int] = []
    for line in stdout.splitlines():
        line = line.strip()
        if line.startswith("s "):
            word = line[2:].strip().upper()
            if word == "SATISFIABLE":
                status = SolveStatus.SAT
            elif word == "UNSATISFIABLE":
                status = SolveStatus.UNSAT
            elif word == "UNKNOWN":
                status = SolveStatus.TIMEOUT
        elif line.startswith("v "):
            values.extend(int(t) for t in line[2:].split())
    if status is None:
        if returncode == 10:
            status = SolveStatus.SAT
        elif returncode == 20:
            status = SolveStatus.UNSAT
        else:
            raise SolverCrash(f"external solver produced no verdict (exit {returncode})")
    if status is not SolveStatus.SAT:
        return SolveResult(status)
    model = {v: False for v in range(1, num_vars + 1)}
    for lit in values:
        if lit != 0 and abs(lit) <= num_vars:
            model[abs(lit)] = lit > 0
    return SolveResult(status, model)


def solve_external(cnf: Cnf, command: str, timeout: float | None = None) -> SolveResult:
    argv = shlex.split(command)
    fd, path = tempfile.mkstemp(suffix=".cnf")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(cnf.to_dimacs())
        try:
            proc = subprocess.run(argv + [path], capture_output=True, text=True, timeout=timeout)
        except subprocess.TimeoutExpired:
            return SolveResult(SolveStatus.TIMEOUT)
        except OSError as exc:
            raise SolverCrash(f"cannot run {argv[0]!r}: {exc}") from exc
        if proc.returncode not in (0, 10, 20):
            raise SolverCrash(f"{argv[0]} exited with {proc.returncode}: {proc.stderr.strip()[:200]}")
        return parse_output(proc.stdout, proc.returncode, cnf.num_vars)
    finally:
        os.unlink(path)
