"""Hash-consed boolean formula DAG.

Every node is interned, so structurally equal formulas built in the same
process are the same object. Equality and hashing are by identity, which
keeps both O(1) on large shared DAGs (ripple adders, unrolled monitors).
Constructors apply local simplifications (constant folding, double
negation, trivial ite) so downstream encoders see small formulas.
"""

from __future__ import annotations

import hashlib
import threading
import weakref
from collections.abc import Iterable, Iterator, Mapping

CONST = "const"
VAR = "var"
NOT = "not"
AND = "and"
OR = "or"
IMPLIES = "implies"
IFF = "iff"
ITE = "ite"


class Expr:
    __slots__ = ("op", "args", "name", "primed", "value", "__weakref__")

    op: str
    args: tuple[Expr, ...]
    name: str | None
    primed: bool
    value: bool | None

    def __repr__(self) -> str:
        return f"Expr({to_str(self)})"

    def __bool__(self) -> bool:
        raise TypeError("Expr has no truth value; use is_true()/is_false()")


_TABLE: weakref.WeakValueDictionary = weakref.WeakValueDictionary()
_LOCK = threading.Lock()


def _intern(op: str, args: tuple[Expr, ...] = (), name: str | None = None,
            primed: bool = False, value: bool | None = None) -> Expr:
    key = (op, tuple(id(a) for a in args), name, primed, value)
    with _LOCK:
        node = _TABLE.get(key)
        if node is not None and node.args == args:
            return node
        node = object.__new__(Expr)
        node.op = op
        node.args = args
        node.name = name
        node.primed = primed
        node.value = value
        _TABLE[key] = node
        return node


TRUE = _intern(CONST, value=True)
FALSE = _intern(CONST, value=False)


def const(b: bool) -> Expr:
    return TRUE if b else FALSE


def is_true(e: Expr) -> bool:
    return e is TRUE


def is_false(e: Expr) -> bool:
    return e is FALSE


def var(name: str, primed: bool = False) -> Expr:
    return _intern(VAR, name=name, primed=primed)


def not_(a: Expr) -> Expr:
    if a.op == CONST:
        return const(not a.value)
    if a.op == NOT:
        return a.args[0]
    return _intern(NOT, (a,))


def _nary(op: str, unit: Expr, zero: Expr, items: Iterable[Expr]) -> Expr:
    out: list[Expr] = []
    seen: set[int] = set()
    for x in items:
        if x is unit:
            continue
        if x is zero:
            return zero
        sub = x.args if x.op == op else (x,)
        for y in sub:
            if id(y) in seen:
                continue
            seen.add(id(y))
            out.append(y)
    for y in out:
        neg = y.args[0] if y.op == NOT else None
        if neg is not None and id(neg) in seen:
            return zero
    if not out:
        return unit
    if len(out) == 1:
        return out[0]
    return _intern(op, tuple(out))


def and_(*items: Expr) -> Expr:
    return _nary(AND, TRUE, FALSE, items)


def or_(*items: Expr) -> Expr:
    return _nary(OR, FALSE, TRUE, items)


def conj(items: Iterable[Expr]) -> Expr:
    return and_(*items)


def disj(items: Iterable[Expr]) -> Expr:
    return or_(*items)


def implies(a: Expr, b: Expr) -> Expr:
    if a is FALSE or b is TRUE or a is b:
        return TRUE
    if a is TRUE:
        return b
    if b is FALSE:
        return not_(a)
    return _intern(IMPLIES, (a, b))


def iff(a: Expr, b: Expr) -> Expr:
    if a is b:
        return TRUE
    if a.op == CONST:
        return b if a.value else not_(b)
    if b.op == CONST:
        return a if b.value else not_(a)
    if (a.op == NOT and a.args[0] is b) or (b.op == NOT and b.args[0] is a):
        return FALSE
    return _intern(IFF, (a, b))


def xor(a: Expr, b: Expr) -> Expr:
    return not_(iff(a, b))


def ite(c: Expr, a: Expr, b: Expr) -> Expr:
    if c.op == CONST:
        return a if c.value else b
    if a is b:
        return a
    if a is TRUE:
        return or_(c, b)
    if a is FALSE:
        return and_(not_(c), b)
    if b is TRUE:
        return or_(not_(c), a)
    if b is FALSE:
        return and_(c, a)
    if c.op == NOT:
        return ite(c.args[0], b, a)
    return _intern(ITE, (c, a, b))


def postorder(roots: Expr | Iterable[Expr]) -> Iterator[Expr]:
    """Yield every distinct node reachable from ``roots``, children first."""
    if isinstance(roots, Expr):
        roots = (roots,)
    done: set[int] = set()
    for root in roots:
        if id(root) in done:
            continue
        stack: list[tuple[Expr, bool]] = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if id(node) in done:
                continue
            if expanded or not node.args:
                done.add(id(node))
                yield node
                continue
            stack.append((node, True))
            for child in reversed(node.args):
                if id(child) not in done:
                    stack.append((child, False))


def support(roots: Expr | Iterable[Expr]) -> list[tuple[str, bool]]:
    """Variables referenced, as ``(name, primed)`` in first-visit order."""
    out: dict[tuple[str, bool], None] = {}
    for node in postorder(roots):
        if node.op == VAR:
            out[(node.name, node.primed)] = None
    return list(out)


def substitute(root: Expr, mapping: Mapping[tuple[str, bool], Expr]) -> Expr:
    """Replace variables ``(name, primed)`` by formulas, rebuilding bottom-up."""
    memo: dict[int, Expr] = {}
    for node in postorder(root):
        if node.op == VAR:
            memo[id(node)] = mapping.get((node.name, node.primed), node)
        elif node.op == CONST:
            memo[id(node)] = node
        else:
            memo[id(node)] = rebuild(node.op, [memo[id(a)] for a in node.args])
    return memo[id(root)]


def rebuild(op: str, args: list[Expr]) -> Expr:
    if op == NOT:
        return not_(args[0])
    if op == AND:
        return and_(*args)
    if op == OR:
        return or_(*args)
    if op == IMPLIES:
        return implies(args[0], args[1])
    if op == IFF:
        return iff(args[0], args[1])
    if op == ITE:
        return ite(args[0], args[1], args[2])
    raise ValueError(f"cannot rebuild {op}")


def _leaf_str(node: Expr) -> str:
    if node.op == CONST:
        return "true" if node.value else "false"
    return node.name + ("'" if node.primed else "")


def to_str(root: Expr, limit: int = 2000) -> str:
    """Infix rendering for diagnostics; large DAGs are truncated."""
    memo: dict[int, str] = {}
    for node in postorder(root):
        if not node.args:
            s = _leaf_str(node)
        else:
            parts = [memo[id(a)] for a in node.args]
            if node.op == NOT:
                s = "!" + parts[0]
            elif node.op == AND:
                s = "(" + " & ".join(parts) + ")"
            elif node.op == OR:
                s = "(" + " | ".join(parts) + ")"
            elif node.op == IMPLIES:
                s = f"({parts[0]} -> {parts[1]})"
            elif node.op == IFF:
                s = f"({parts[0]} <-> {parts[1]})"
            else:
                s = f"({parts[0]} ? {parts[1]} : {parts[2]})"
        if len(s) > limit:
            s = s[:limit] + "..."
        memo[id(node)] = s
    return memo[id(root)]


def fingerprint(roots: Expr | Iterable[Expr]) -> str:
    """Stable structural digest, linear in DAG size and independent of ids."""
    if isinstance(roots, Expr):
        roots = (roots,)
    roots = list(roots)
    index: dict[int, int] = {}
    h = hashlib.sha1()
    for node in postorder(roots):
        index[id(node)] = len(index)
        if node.args:
            line = node.op + "(" + ",".join(str(index[id(a)]) for a in node.args) + ")"
        else:
            line = node.op + ":" + _leaf_str(node)
        h.update(line.encode())
        h.update(b"\n")
    h.update(("roots:" + ",".join(str(index[id(r)]) for r in roots)).encode())
    return h.hexdigest()


def evaluate(root: Expr, lookup: Mapping[tuple[str, bool], bool]) -> bool:
    """Reference interpreter; raises KeyError on an unbound variable."""
    memo: dict[int, bool] = {}
    for node in postorder(root):
        op = node.op
        if op == CONST:
            v = node.value
        elif op == VAR:
            v = bool(lookup[(node.name, node.primed)])
        else:
            a = [memo[id(x)] for x in node.args]
            if op == NOT:
                v = not a[0]
            elif op == AND:
                v = all(a)
            elif op == OR:
                v = any(a)
            elif op == IMPLIES:
                v = (not a[0]) or a[1]
            elif op == IFF:
                v = a[0] == a[1]
            else:
                v = a[1] if a[0] else a[2]
        memo[id(node)] = v
    return memo[id(root)]


def compile_py(outputs: list[Expr], slots: Mapping[tuple[str, bool], tuple[str, int]]):
    """Compile formulas to a Python function of positional tuples.

    ``slots`` maps each variable to ``(argument, position)``; arguments are
    ``c`` (current state), ``n`` (next state) and ``i`` (inputs). The
    returned callable is ``f(c, n, i) -> tuple[bool, ...]``.
    """
    lines = ["def _f(c, n, i):"]
    names: dict[int, str] = {}
    for k, node in enumerate(postorder(outputs)):
        t = f"t{k}"
        names[id(node)] = t
        op = node.op
        if op == CONST:
            rhs = "True" if node.value else "False"
        elif op == VAR:
            key = (node.name, node.primed)
            if key not in slots:
                raise KeyError(key)
            arg, pos = slots[key]
            rhs = f"bool({arg}[{pos}])"
        else:
            a = [names[id(x)] for x in node.args]
            if op == NOT:
                rhs = f"not {a[0]}"
            elif op == AND:
                rhs = " and ".join(a)
            elif op == OR:
                rhs = " or ".join(a)
            elif op == IMPLIES:
                rhs = f"(not {a[0]}) or {a[1]}"
            elif op == IFF:
                rhs = f"{a[0]} == {a[1]}"
            else:
                rhs = f"{a[1]} if {a[0]} else {a[2]}"
        lines.append(f"    {t} = {rhs}")
    ret = ", ".join(names[id(o)] for o in outputs)
    lines.append(f"    return ({ret},)" if outputs else "    return ()")
    ns: dict = {}
    exec("\n".join(lines), ns)
    return ns["_f"]
