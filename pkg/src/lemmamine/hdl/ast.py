"""Syntax trees for the design subset and the safety-SVA subset.

All nodes are frozen dataclasses with structural equality. Parenthesized
sub-expressions do not get their own node; the printer parenthesizes every
compound operand, so print/parse round-trips are structural identities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

Pos = tuple[int, int]


# -- expressions ---------------------------------------------------------------

@dataclass(frozen=True)
class Ident:
    name: str


@dataclass(frozen=True)
class Number:
    value: int
    width: int | None = None


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Ternary:
    cond: "Node"
    then: "Node"
    other: "Node"


@dataclass(frozen=True)
class Concat:
    items: tuple["Node", ...]


@dataclass(frozen=True)
class Repl:
    count: "Node"
    items: tuple["Node", ...]


@dataclass(frozen=True)
class Index:
    name: str
    index: "Node"


@dataclass(frozen=True)
class Slice:
    name: str
    msb: "Node"
    lsb: "Node"


@dataclass(frozen=True)
class SysCall:
    name: str
    args: tuple["Node", ...]


# -- properties ------------------------------------------------------------------

@dataclass(frozen=True)
class Sequence:
    """``##d0 t0 ##d1 t1 ...`` with relative delays; ``d0`` may be 0."""

    terms: tuple[tuple[int, "Node"], ...]

    @property
    def length(self) -> int:
        return sum(d for d, _ in self.terms)


@dataclass(frozen=True)
class SeqProp:
    seq: Sequence


@dataclass(frozen=True)
class Implication:
    ante: Sequence
    cons: Sequence
    overlapping: bool = True


@dataclass(frozen=True)
class PropAnd:
    items: tuple["PropNode", ...]


@dataclass(frozen=True)
class PropRef:
    name: str
    target: "PropertyAst" = field(compare=True)


@dataclass(frozen=True)
class TemporalParen:
    """A parenthesized temporal property met where an expression was expected."""

    prop: "PropNode"


PropNode = Union[SeqProp, Implication, PropAnd, PropRef]
Node = Union[Ident, Number, Unary, Binary, Ternary, Concat, Repl, Index, Slice, SysCall,
             TemporalParen, PropRef]


@dataclass(frozen=True)
class Clock:
    edge: str  # "posedge" | "negedge"
    signal: str


@dataclass(frozen=True)
class PropertyAst:
    body: PropNode
    clock: Clock | None = None
    disable: Node | None = None
    name: str | None = None


# -- statements ----------------------------------------------------------------

@dataclass(frozen=True)
class LValue:
    name: str
    msb: Node | None = None
    lsb: Node | None = None  # equal to msb object for single-bit selects
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Assign:
    target: LValue
    value: Node
    nonblocking: bool
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class If:
    cond: Node
    then: "Stmt"
    other: "Stmt | None" = None


@dataclass(frozen=True)
class Case:
    subject: Node
    items: tuple[tuple[tuple[Node, ...], "Stmt"], ...]
    default: "Stmt | None" = None


@dataclass(frozen=True)
class Block:
    stmts: tuple["Stmt", ...]


@dataclass(frozen=True)
class TaskCall:
    name: str
    pos: Pos = field(default=(0, 0), compare=False)


Stmt = Union[Assign, If, Case, Block, TaskCall]


# -- design ------------------------------------------------------------------------

@dataclass
class Decl:
    name: str
    kind: str  # "input" | "output" | "reg" | "wire" | "logic"
    msb: int = 0
    lsb: int = 0
    is_reg: bool = False
    direction: str | None = None
    init: Node | None = None
    pos: Pos = (0, 0)
    ranged: bool = False

    @property
    def width(self) -> int:
        return abs(self.msb - self.lsb) + 1


@dataclass
class Always:
    events: tuple[tuple[str, str], ...]  # (edge, signal)
    body: Stmt
    pos: Pos = (0, 0)


@dataclass
class ContAssign:
    target: LValue
    value: Node
    pos: Pos = (0, 0)


@dataclass
class DesignAst:
    name: str
    ports: list[str] = field(default_factory=list)
    decls: dict[str, Decl] = field(default_factory=dict)
    params: dict[str, Node] = field(default_factory=dict)
    tasks: dict[str, Stmt] = field(default_factory=dict)
    always: list[Always] = field(default_factory=list)
    initials: list[Stmt] = field(default_factory=list)
    assigns: list[ContAssign] = field(default_factory=list)
    properties: dict[str, PropertyAst] = field(default_factory=dict)
    assertions: list[str] = field(default_factory=list)
    clock: str | None = None
