"""CNF container and frame-indexed Tseitin encoding."""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import expr as E


@dataclass
class Cnf:
    num_vars: int = 0
    clauses: list[tuple[int, ...]] = field(default_factory=list)

    def __post_init__(self) -> None:
        for c in self.clauses:
            for lit in c:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range 1..{self.num_vars}")

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.num_vars} {len(self.clauses)}"]
        lines.extend(" ".join(map(str, c)) + " 0" for c in self.clauses)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dimacs(cls, text: str) -> Cnf:
        num_vars = 0
        clauses: list[tuple[int, ...]] = []
        cur: list[int] = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line[0] in "c%":
                continue
            if line.startswith("p"):
                parts = line.split()
                num_vars = int(parts[2])
                continue
            for tok in line.split():
                lit = int(tok)
                if lit == 0:
                    clauses.append(tuple(cur))
                    cur = []
                else:
                    cur.append(lit)
        if cur:
            clauses.append(tuple(cur))
        return cls(num_vars, clauses)


class Encoder:
    """Incrementally builds a CNF for formulas instantiated at time frames.

    A variable ``v`` at frame ``f`` gets one CNF variable; a primed reference
    encoded at frame ``f`` denotes ``v`` at ``f + 1``. Tseitin gates are
    memoized per ``(node, frame)``, so shared subformulas cost one gate.
    """

    def __init__(self) -> None:
        self.num_vars = 0
        self.clauses: list[tuple[int, ...]] = []
        self.var_map: dict[tuple[str, int], int] = {}
        self._memo: dict[tuple[int, int], int] = {}
        self._keep: list[E.Expr] = []
        self._true: int | None = None

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def lit(self, name: str, frame: int) -> int:
        key = (name, frame)
        v = self.var_map.get(key)
        if v is None:
            v = self.var_map[key] = self.new_var()
        return v

    def true_lit(self) -> int:
        if self._true is None:
            self._true = self.new_var()
            self.clauses.append((self._true,))
        return self._true

    def add_clause(self, lits) -> None:
        self.clauses.append(tuple(lits))

    def encode(self, root: E.Expr, frame: int) -> int:
        self._keep.append(root)
        memo = self._memo
        for node in E.postorder(root):
            key = (id(node), frame)
            if key in memo:
                continue
            op = node.op
            if op == E.CONST:
                t = self.true_lit()
                memo[key] = t if node.value else -t
                continue
            if op == E.VAR:
                memo[key] = self.lit(node.name, frame + (1 if node.primed else 0))
                continue
            a = [memo[(id(x), frame)] for x in node.args]
            if op == E.NOT:
                memo[key] = -a[0]
                continue
            x = self.new_var()
            if op == E.AND:
                for y in a:
                    self.clauses.append((-x, y))
                self.clauses.append((x, *(-y for y in a)))
            elif op == E.OR:
                for y in a:
                    self.clauses.append((x, -y))
                self.clauses.append((-x, *a))
            elif op == E.IMPLIES:
                p, q = a
                self.clauses += [(-x, -p, q), (x, p), (x, -q)]
            elif op == E.IFF:
                p, q = a
                self.clauses += [(-x, -p, q), (-x, p, -q), (x, p, q), (x, -p, -q)]
            else:
                c, p, q = a
                self.clauses += [(-x, -c, p), (-x, c, q), (x, -c, -p), (x, c, -q),
                                 (-x, p, q), (x, -p, -q)]
            memo[key] = x
        return memo[(id(root), frame)]

    def assert_formula(self, root: E.Expr, frame: int) -> None:
        """Constrain ``root`` to hold at ``frame``, splitting top-level structure."""
        if root.op == E.AND:
            for child in root.args:
                self.assert_formula(child, frame)
        elif root.op == E.CONST:
            if not root.value:
                self.clauses.append(())
        elif root.op == E.OR:
            self.clauses.append(tuple(self.encode(c, frame) for c in root.args))
        elif root.op == E.IFF:
            p = self.encode(root.args[0], frame)
            q = self.encode(root.args[1], frame)
            self.clauses += [(-p, q), (p, -q)]
        else:
            self.clauses.append((self.encode(root, frame),))

    def cnf(self) -> Cnf:
        return Cnf(self.num_vars, list(self.clauses))


def bitblast(formula: E.Expr, frame: int = 0) -> tuple[Cnf, dict[tuple[str, int], int]]:
    """Equisatisfiable CNF for ``formula`` at ``frame`` plus its variable map."""
    enc = Encoder()
    enc.assert_formula(formula, frame)
    return enc.cnf(), dict(enc.var_map)
