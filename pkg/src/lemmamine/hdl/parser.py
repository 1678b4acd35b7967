"""Recursive-descent parser for the design subset and the safety-SVA subset.

Expression precedence, loosest first::

    -> <->   ?:   ||   &&   |   ^ ~^   &   == !=   < <= > >=   << >>   + -   * / %   **   unary

Properties are ``[@(edge clk)] [disable iff (expr)] p`` where ``p`` is a
conjunction (``and``) of implications ``seq |-> seq`` / ``seq |=> seq`` or
plain sequences ``[##n] e (##n e)*`` with literal delays ``n >= 1``.
"""

from __future__ import annotations

from collections.abc import Collection, Mapping

from ..errors import FrontendError, HdlSyntaxError, UnknownSignal, UnsupportedConstruct
from . import ast as A
from .lexer import Token, parse_number, tokenize
from .lower import const_eval

UNSUPPORTED_KEYWORDS = {
    "for", "while", "repeat", "forever", "generate", "endgenerate", "genvar", "function",
    "endfunction", "integer", "real", "time", "casez", "casex", "always_comb", "always_latch",
    "inout", "sequence", "endsequence", "assume", "cover", "fork", "join", "interface",
    "package", "import", "typedef", "struct", "enum", "wait", "force", "release", "deassign",
    "defparam", "specify", "primitive", "clocking", "$past", "$rose", "$fell",
    "$stable", "$changed",
}
UNSUPPORTED_PROPERTY_KEYWORDS = {
    "or", "not", "until", "s_until", "until_with", "throughout", "within", "intersect",
    "eventually", "s_eventually", "always", "nexttime", "s_nexttime", "first_match",
    "implies", "iff", "if", "case", "accept_on", "reject_on", "strong", "weak",
}
KEYWORDS = {
    "module", "endmodule", "input", "output", "reg", "wire", "logic", "bit", "parameter",
    "localparam", "assign", "always", "always_ff", "initial", "begin", "end", "if", "else",
    "case", "endcase", "default", "task", "endtask", "property", "endproperty", "assert",
    "disable", "iff", "posedge", "negedge", "or", "and", "automatic", "signed", "unsigned",
} | (UNSUPPORTED_KEYWORDS - {"$past", "$rose", "$fell", "$stable", "$changed"})

_BINARY_LEVELS: list[tuple[str, ...]] = [
    ("||",),
    ("&&",),
    ("|",),
    ("^", "~^", "^~"),
    ("&",),
    ("==", "!=", "===", "!=="),
    ("<", "<=", ">", ">="),
    ("<<", ">>", "<<<", ">>>"),
    ("+", "-"),
    ("*", "/", "%"),
    ("**",),
]
_UNARY = ("!", "~", "-", "+", "&", "|", "^", "~&", "~|", "~^", "^~")
_TASK_IGNORED = {"$display", "$write", "$strobe", "$monitor", "$info", "$warning", "$error",
                 "$fatal", "$finish", "$stop", "$dumpfile", "$dumpvars"}


class Parser:
    def __init__(self, text: str, signals: Collection[str] | None = None,
                 symbols: Mapping[str, A.PropertyAst] | None = None):
        self.toks: list[Token] = tokenize(text)
        self.i = 0
        self.signals = signals
        self.symbols = dict(symbols or {})
        self.params: dict[str, tuple[int, int]] = {}

    # -- token helpers -------------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "id") and t.text in texts

    def accept(self, *texts: str) -> Token | None:
        if self.at(*texts):
            return self.advance()
        return None

    def expect(self, text: str, expected: str | None = None) -> Token:
        if not self.at(text):
            self.fail(f"unexpected {self.describe(self.tok)}", expected or repr(text))
        return self.advance()

    def describe(self, t: Token) -> str:
        return "end of input" if t.kind == "eof" else repr(t.text)

    def fail(self, message: str, expected: str | None = None, tok: Token | None = None):
        t = tok or self.tok
        if t.kind in ("id", "sys") and t.text in UNSUPPORTED_KEYWORDS:
            raise UnsupportedConstruct(t.text, t.pos)
        raise HdlSyntaxError(message, t.pos, expected)

    def ident(self, expected: str = "identifier") -> Token:
        t = self.tok
        if t.kind != "id" or t.text in KEYWORDS:
            self.fail(f"unexpected {self.describe(t)}", expected)
        return self.advance()

    def const(self, node: A.Node) -> int:
        try:
            return const_eval(node, self.params)
        except FrontendError as exc:
            raise HdlSyntaxError(exc.message, self.tok.pos, "constant expression") from None

    # -- expressions -----------------------------------------------------------------

    def expression(self, temporal: bool = False) -> A.Node:
        left = self.ternary(temporal)
        if self.at("->", "<->"):
            op = self.advance().text
            right = self.expression(temporal)
            return A.Binary(op, left, right)
        return left

    def ternary(self, temporal: bool) -> A.Node:
        cond = self.binary(0, temporal)
        if self.accept("?"):
            then = self.ternary(temporal)
            self.expect(":")
            other = self.ternary(temporal)
            return A.Ternary(cond, then, other)
        return cond

    def binary(self, level: int, temporal: bool) -> A.Node:
        if level == len(_BINARY_LEVELS):
            return self.unary(temporal)
        ops = _BINARY_LEVELS[level]
        left = self.binary(level + 1, temporal)
        while self.tok.kind == "op" and self.tok.text in ops:
            op = self.advance().text
            right = self.binary(level + 1, temporal)
            left = A.Binary(op, left, right)
        return left

    def unary(self, temporal: bool) -> A.Node:
        if self.tok.kind == "op" and self.tok.text in _UNARY:
            op = self.advance().text
            return A.Unary(op, self.unary(temporal))
        return self.primary(temporal)

    def primary(self, temporal: bool) -> A.Node:
        t = self.tok
        if t.kind == "num":
            self.advance()
            try:
                value, width = parse_number(t.text)
            except ValueError:
                raise HdlSyntaxError(f"unsupported literal {t.text!r} (x/z digits)", t.pos) from None
            return A.Number(value, width)
        if t.kind == "sys":
            return self.syscall()
        if t.kind == "op" and t.text == "(":
            self.advance()
            if temporal:
                prop = self.prop_and()
                self.expect(")")
                if isinstance(prop, A.SeqProp) and len(prop.seq.terms) == 1 and prop.seq.terms[0][0] == 0:
                    return prop.seq.terms[0][1]
                return A.TemporalParen(prop)
            inner = self.expression()
            self.expect(")")
            return inner
        if t.kind == "op" and t.text == "{":
            return self.concat(temporal)
        if t.kind == "id":
            if temporal and t.text in UNSUPPORTED_PROPERTY_KEYWORDS:
                raise UnsupportedConstruct(f"property operator {t.text}", t.pos)
            if t.text in KEYWORDS:
                self.fail(f"unexpected {self.describe(t)}", "expression")
            self.advance()
            name = t.text
            if self.accept("["):
                hi = self.expression()
                if self.accept(":"):
                    lo = self.expression()
                    self.expect("]")
                    self.check_signal(name, t)
                    return A.Slice(name, hi, lo)
                self.expect("]")
                self.check_signal(name, t)
                return A.Index(name, hi)
            if self.at("("):
                raise UnsupportedConstruct(f"function call {name}", t.pos)
            if temporal and name in self.symbols and (self.signals is None or name not in self.signals):
                return A.PropRef(name, self.symbols[name])
            self.check_signal(name, t)
            return A.Ident(name)
        self.fail(f"unexpected {self.describe(t)}", "expression")

    def check_signal(self, name: str, tok: Token) -> None:
        if self.signals is not None and name not in self.signals and name not in self.params:
            raise UnknownSignal(f"unknown signal {name!r}", tok.pos)

    def syscall(self) -> A.Node:
        t = self.advance()
        if t.text not in ("$onehot", "$onehot0"):
            raise UnsupportedConstruct(f"system function {t.text}", t.pos)
        self.expect("(")
        args = [self.expression()]
        while self.accept(","):
            args.append(self.expression())
        self.expect(")")
        return A.SysCall(t.text, tuple(args))

    def concat(self, temporal: bool) -> A.Node:
        self.expect("{")
        first = self.expression(temporal)
        if self.at("{"):
            self.advance()
            items = [self.expression(temporal)]
            while self.accept(","):
                items.append(self.expression(temporal))
            self.expect("}")
            self.expect("}")
            return A.Repl(first, tuple(items))
        items = [first]
        while self.accept(","):
            items.append(self.expression(temporal))
        self.expect("}")
        return A.Concat(tuple(items))

    # -- properties ------------------------------------------------------------------

    def property_spec(self, name: str | None = None) -> A.PropertyAst:
        clock = None
        disable = None
        if self.accept("@"):
            clock = self.clock_spec()
        if self.accept("disable"):
            self.expect("iff")
            self.expect("(")
            disable = self.expression()
            self.expect(")")
        body = self.prop_and()
        return A.PropertyAst(body, clock, disable, name)

    def clock_spec(self) -> A.Clock:
        self.expect("(")
        edge = self.accept("posedge", "negedge")
        sig = self.ident("clock signal")
        self.expect(")")
        return A.Clock(edge.text if edge else "posedge", sig.text)

    def prop_and(self) -> A.PropNode:
        items = [self.prop_impl()]
        while self.accept("and"):
            items.append(self.prop_impl())
        if self.tok.kind == "id" and self.tok.text in UNSUPPORTED_PROPERTY_KEYWORDS:
            raise UnsupportedConstruct(f"property operator {self.tok.text}", self.tok.pos)
        return items[0] if len(items) == 1 else A.PropAnd(tuple(items))

    def prop_impl(self) -> A.PropNode:
        start = self.tok
        ante = self.sequence()
        if self.at("|->", "|=>"):
            overlapping = self.advance().text == "|->"
            cons = self.sequence()
            return A.Implication(self.pure(ante, start), self.pure(cons, start), overlapping)
        if len(ante) == 1 and ante[0][0] == 0:
            node = ante[0][1]
            if isinstance(node, A.TemporalParen):
                return node.prop
            if isinstance(node, A.PropRef):
                return node
        return A.SeqProp(self.pure(ante, start))

    def pure(self, terms: list[tuple[int, A.Node]], start: Token) -> A.Sequence:
        for _, node in terms:
            if isinstance(node, (A.TemporalParen, A.PropRef)):
                raise HdlSyntaxError("property used where a sequence was expected", start.pos)
        return A.Sequence(tuple(terms))

    def delay(self) -> int:
        hash_tok = self.expect("##")
        if self.at("["):
            raise HdlSyntaxError("delay ranges are outside the supported subset", hash_tok.pos)
        t = self.tok
        if t.kind != "num":
            self.fail(f"unexpected {self.describe(t)}", "delay literal")
        self.advance()
        value, _ = parse_number(t.text)
        if value < 1:
            raise HdlSyntaxError("##0 is outside the supported subset", hash_tok.pos, "delay >= 1")
        return value

    def sequence(self) -> list[tuple[int, A.Node]]:
        terms: list[tuple[int, A.Node]] = []
        pending = self.delay() if self.at("##") else 0
        while True:
            start = self.tok
            node = self.expression(temporal=True)
            self.validate_boolean(node, start)
            if isinstance(node, A.TemporalParen) and isinstance(node.prop, A.SeqProp):
                inner = node.prop.seq.terms
                terms.append((inner[0][0] + pending, inner[0][1]))
                terms.extend(inner[1:])
            else:
                terms.append((pending, node))
            if not self.at("##"):
                return terms
            pending = self.delay()

    def validate_boolean(self, node: A.Node, start: Token) -> None:
        """Temporal sub-properties may only appear as whole sequence elements."""
        stack = [] if isinstance(node, (A.TemporalParen, A.PropRef)) else [node]
        while stack:
            n = stack.pop()
            if isinstance(n, (A.TemporalParen, A.PropRef)):
                raise HdlSyntaxError("temporal property used inside a boolean expression", start.pos)
            if isinstance(n, A.Unary):
                stack.append(n.operand)
            elif isinstance(n, A.Binary):
                stack.extend((n.left, n.right))
            elif isinstance(n, A.Ternary):
                stack.extend((n.cond, n.then, n.other))
            elif isinstance(n, (A.Concat, A.Repl)):
                stack.extend(n.items)
            elif isinstance(n, A.SysCall):
                stack.extend(n.args)

    def property_text(self) -> A.PropertyAst:
        """A property block, an assert statement, or a bare property."""
        if self.accept("property"):
            name = self.ident("property name").text
            if self.accept("("):
                raise UnsupportedConstruct("property arguments", self.tok.pos)
            self.expect(";")
            prop = self.property_spec(name)
            self.accept(";")
            self.expect("endproperty")
            if self.accept(":"):
                self.ident("end label")
        else:
            label = None
            if self.tok.kind == "id" and self.peek().text == ":" and self.peek(2).text == "assert":
                label = self.advance().text
                self.advance()
            if self.accept("assert"):
                self.expect("property")
                self.expect("(")
                prop = self.property_spec(label)
                self.expect(")")
            else:
                prop = self.property_spec()
        self.accept(";")
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.describe(self.tok)}", "end of property")
        return prop

    # -- statements ------------------------------------------------------------------

    def statement(self) -> A.Stmt:
        t = self.tok
        if self.accept(";"):
            return A.Block(())
        if self.accept("begin"):
            if self.accept(":"):
                self.ident("block label")
            stmts = []
            while not self.accept("end"):
                if self.tok.kind == "eof":
                    self.fail("unexpected end of input", "'end'")
                stmts.append(self.statement())
            if self.accept(":"):
                self.ident("block label")
            return A.Block(tuple(stmts))
        if self.accept("if"):
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            then = self.statement()
            other = self.statement() if self.accept("else") else None
            return A.If(cond, then, other)
        if self.at("unique", "priority") and self.peek().text in ("if", "case"):
            self.advance()
            return self.statement()
        if self.accept("case"):
            return self.case_statement()
        if t.kind == "sys":
            self.advance()
            if t.text not in _TASK_IGNORED:
                raise UnsupportedConstruct(f"system task {t.text}", t.pos)
            if self.accept("("):
                depth = 1
                while depth:
                    if self.tok.kind == "eof":
                        self.fail("unexpected end of input", "')'")
                    tx = self.advance().text
                    depth += {"(": 1, ")": -1}.get(tx, 0)
            self.expect(";")
            return A.Block(())
        if t.kind == "id" and t.text not in KEYWORDS:
            if self.peek().text in (";", "(") and self.peek().kind == "op":
                self.advance()
                if self.accept("("):
                    if not self.accept(")"):
                        raise UnsupportedConstruct("task arguments", t.pos)
                self.expect(";")
                return A.TaskCall(t.text, t.pos)
            target = self.lvalue()
            op = self.tok
            if not self.at("=", "<="):
                self.fail(f"unexpected {self.describe(op)}", "'=' or '<='")
            self.advance()
            if self.at("#"):
                raise UnsupportedConstruct("intra-assignment delay", self.tok.pos)
            value = self.expression()
            self.expect(";")
            return A.Assign(target, value, op.text == "<=", t.pos)
        if self.at("{"):
            raise UnsupportedConstruct("concatenation on the left-hand side", t.pos)
        if self.at("#"):
            raise UnsupportedConstruct("delay control", t.pos)
        self.fail(f"unexpected {self.describe(t)}", "statement")

    def case_statement(self) -> A.Case:
        self.expect("(")
        subject = self.expression()
        self.expect(")")
        items: list[tuple[tuple[A.Node, ...], A.Stmt]] = []
        default = None
        while not self.accept("endcase"):
            if self.tok.kind == "eof":
                self.fail("unexpected end of input", "'endcase'")
            if self.accept("default"):
                self.accept(":")
                default = self.statement()
                continue
            labels = [self.expression()]
            while self.accept(","):
                labels.append(self.expression())
            self.expect(":")
            items.append((tuple(labels), self.statement()))
        return A.Case(subject, tuple(items), default)

    def lvalue(self) -> A.LValue:
        t = self.ident("assignment target")
        if self.accept("["):
            hi = self.expression()
            lo = hi
            if self.accept(":"):
                lo = self.expression()
            self.expect("]")
            return A.LValue(t.text, hi, lo, t.pos)
        return A.LValue(t.text, pos=t.pos)

    # -- design ------------------------------------------------------------------------

    def design(self) -> A.DesignAst:
        while self.tok.kind != "eof" and not self.at("module"):
            self.fail(f"unexpected {self.describe(self.tok)}", "'module'")
        self.expect("module", "'module'")
        d = A.DesignAst(self.ident("module name").text)
        self.design_ast = d
        if self.accept("#"):
            self.expect("(")
            while not self.accept(")"):
                self.accept("parameter", "localparam")
                self.parameter_item(d)
                self.accept(",")
        if self.accept("("):
            self.port_list(d)
        self.expect(";")
        while not self.accept("endmodule"):
            if self.tok.kind == "eof":
                self.fail("unexpected end of input", "'endmodule'")
            self.module_item(d)
        if self.accept(":"):
            self.ident("end label")
        if self.tok.kind != "eof":
            if self.at("module"):
                raise UnsupportedConstruct("multiple modules", self.tok.pos)
            self.fail(f"unexpected {self.describe(self.tok)}", "end of input")
        return d

    def range_spec(self) -> tuple[int, int] | None:
        if not self.accept("["):
            return None
        msb = self.const(self.expression())
        self.expect(":")
        lsb = self.const(self.expression())
        self.expect("]")
        return msb, lsb

    def declare(self, d: A.DesignAst, name: Token, kind: str, rng, is_reg: bool,
                direction: str | None, init: A.Node | None = None) -> None:
        msb, lsb = rng if rng else (0, 0)
        prev = d.decls.get(name.text)
        if prev is not None:
            # "output x; reg x;" style split declarations
            if prev.direction and direction is None and kind in ("reg", "wire", "logic"):
                prev.is_reg = prev.is_reg or is_reg
                if rng:
                    prev.msb, prev.lsb, prev.ranged = msb, lsb, True
                if init is not None:
                    prev.init = init
                return
            raise HdlSyntaxError(f"{name.text!r} declared twice", name.pos)
        d.decls[name.text] = A.Decl(name.text, kind, msb, lsb, is_reg, direction, init, name.pos,
                                    rng is not None)

    def port_list(self, d: A.DesignAst) -> None:
        if self.accept(")"):
            return
        direction: str | None = None
        is_reg = False
        rng = None
        while True:
            if self.at("inout"):
                raise UnsupportedConstruct("inout", self.tok.pos)
            if self.at("input", "output"):
                direction = self.advance().text
                is_reg, rng = False, None
                if self.at("reg", "wire", "logic", "bit"):
                    is_reg = self.advance().text in ("reg", "logic", "bit")
                self.accept("signed", "unsigned")
                rng = self.range_spec()
            name = self.ident("port name")
            d.ports.append(name.text)
            if direction is not None:
                self.declare(d, name, direction, rng, is_reg, direction)
            if self.accept(")"):
                return
            self.expect(",", "',' or ')'")

    def parameter_item(self, d: A.DesignAst) -> None:
        self.accept("signed", "unsigned")
        rng = self.range_spec()
        while True:
            name = self.ident("parameter name")
            self.expect("=")
            value_node = self.expression()
            value = self.const(value_node)
            width = abs(rng[0] - rng[1]) + 1 if rng else 32
            self.params[name.text] = (value & ((1 << width) - 1), width)
            d.params[name.text] = A.Number(value & ((1 << width) - 1), width)
            if not (self.at(",") and self.peek().kind == "id" and self.peek().text not in KEYWORDS
                    and self.peek(2).text == "="):
                return
            self.advance()

    def module_item(self, d: A.DesignAst) -> None:
        t = self.tok
        if self.at("input", "output"):
            direction = self.advance().text
            is_reg = False
            if self.at("reg", "wire", "logic", "bit"):
                is_reg = self.advance().text in ("reg", "logic", "bit")
            self.accept("signed", "unsigned")
            rng = self.range_spec()
            while True:
                name = self.ident("port name")
                if name.text not in d.ports:
                    raise HdlSyntaxError(f"{name.text!r} is not in the port list", name.pos)
                self.declare(d, name, direction, rng, is_reg, direction)
                if not self.accept(","):
                    break
            self.expect(";")
            return
        if self.at("reg", "wire", "logic", "bit"):
            kind = self.advance().text
            self.accept("signed", "unsigned")
            rng = self.range_spec()
            while True:
                name = self.ident("signal name")
                if self.at("["):
                    raise UnsupportedConstruct("memory/array declaration", self.tok.pos)
                init = None
                if self.accept("="):
                    init = self.expression()
                is_reg = kind != "wire"
                if kind == "wire" and init is not None:
                    self.declare(d, name, kind, rng, False, None)
                    d.assigns.append(A.ContAssign(A.LValue(name.text, pos=name.pos), init, name.pos))
                else:
                    self.declare(d, name, "reg" if is_reg else kind, rng, is_reg, None, init)
                if not self.accept(","):
                    break
            self.expect(";")
            return
        if self.at("parameter", "localparam"):
            self.advance()
            self.parameter_item(d)
            self.expect(";")
            return
        if self.accept("assign"):
            while True:
                target = self.lvalue()
                self.expect("=")
                value = self.expression()
                d.assigns.append(A.ContAssign(target, value, target.pos))
                if not self.accept(","):
                    break
            self.expect(";")
            return
        if self.at("always", "always_ff"):
            self.advance()
            self.expect("@", "event control")
            if self.accept("*"):
                raise UnsupportedConstruct("combinational always block", t.pos)
            self.expect("(")
            if self.at("*"):
                raise UnsupportedConstruct("combinational always block", t.pos)
            events = []
            while True:
                edge = self.accept("posedge", "negedge")
                if edge is None:
                    raise UnsupportedConstruct("level-sensitive always block", t.pos)
                events.append((edge.text, self.ident("event signal").text))
                if not (self.accept("or") or self.accept(",")):
                    break
            self.expect(")")
            body = self.statement()
            d.always.append(A.Always(tuple(events), body, t.pos))
            return
        if self.accept("initial"):
            d.initials.append(self.statement())
            return
        if self.accept("task"):
            self.accept("automatic")
            name = self.ident("task name")
            if self.at("("):
                raise UnsupportedConstruct("task arguments", self.tok.pos)
            self.expect(";")
            if self.at("input", "output"):
                raise UnsupportedConstruct("task arguments", self.tok.pos)
            stmts = []
            while not self.accept("endtask"):
                if self.tok.kind == "eof":
                    self.fail("unexpected end of input", "'endtask'")
                stmts.append(self.statement())
            if self.accept(":"):
                self.ident("end label")
            d.tasks[name.text] = A.Block(tuple(stmts))
            return
        if self.accept("property"):
            name = self.ident("property name")
            if self.at("("):
                raise UnsupportedConstruct("property arguments", self.tok.pos)
            self.expect(";")
            self.symbols_for(d)
            prop = self.property_spec(name.text)
            self.accept(";")
            self.expect("endproperty")
            if self.accept(":"):
                self.ident("end label")
            d.properties[name.text] = prop
            self.symbols[name.text] = prop
            return
        if (t.kind == "id" and self.peek().text == ":" and self.peek(2).text == "assert") or self.at("assert"):
            label = None
            if not self.at("assert"):
                label = self.advance().text
                self.advance()
            self.expect("assert")
            self.expect("property")
            self.expect("(")
            self.symbols_for(d)
            prop = self.property_spec(label)
            self.expect(")")
            if self.accept("else"):
                self.statement()
            else:
                self.expect(";")
            if isinstance(prop.body, A.PropRef) and prop.clock is None and prop.disable is None:
                d.assertions.append(prop.body.name)
            else:
                name = label or f"assert_{len(d.assertions)}"
                d.properties[name] = prop
                self.symbols[name] = prop
                d.assertions.append(name)
            return
        if t.kind == "id" and t.text not in KEYWORDS and self.peek().kind in ("id", "op") and \
                (self.peek().kind == "id" or self.peek().text == "#"):
            raise UnsupportedConstruct("module instantiation", t.pos)
        self.fail(f"unexpected {self.describe(t)}", "module item")

    def symbols_for(self, d: A.DesignAst) -> None:
        self.signals = set(d.decls) | set(d.params)


def parse_design(text: str) -> A.DesignAst:
    """Parse one module. Raises ``HdlSyntaxError`` or ``UnsupportedConstruct``."""
    p = Parser(text)
    d = p.design()
    clocks = {sig for a in d.always for edge, sig in a.events[:1]}
    if len(clocks) > 1:
        raise UnsupportedConstruct("multiple clocks", d.always[-1].pos)
    if clocks:
        d.clock = clocks.pop()
    else:
        for name, decl in d.decls.items():
            if decl.direction == "input" and name in ("clk", "clock"):
                d.clock = name
    for prop in d.properties.values():
        if prop.clock and d.clock and prop.clock.signal != d.clock:
            raise UnsupportedConstruct("property clocked by a different signal")
    return d


def parse_property(text: str, signals: Collection[str] | None = None,
                   symbols: Mapping[str, A.PropertyAst] | None = None) -> A.PropertyAst:
    """Parse a property block, an ``assert property`` statement or a bare property.

    ``signals`` (when given) is the set of legal identifiers; ``symbols``
    maps names of previously parsed properties that may be referenced.
    """
    return Parser(text, signals, symbols).property_text()


def parse_expression(text: str, signals: Collection[str] | None = None) -> A.Node:
    p = Parser(text, signals)
    node = p.expression()
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p.describe(p.tok)}", "end of expression")
    return node


# -- printing ---------------------------------------------------------------------------

_ATOMIC = (A.Ident, A.Number, A.Index, A.Slice, A.SysCall, A.Concat, A.Repl, A.PropRef)


def print_expr(node: A.Node) -> str:
    if isinstance(node, A.Ident):
        return node.name
    if isinstance(node, A.PropRef):
        return node.name
    if isinstance(node, A.Number):
        return str(node.value) if node.width is None else f"{node.width}'d{node.value}"
    if isinstance(node, A.Index):
        return f"{node.name}[{print_expr(node.index)}]"
    if isinstance(node, A.Slice):
        return f"{node.name}[{print_expr(node.msb)}:{print_expr(node.lsb)}]"
    if isinstance(node, A.SysCall):
        return f"{node.name}({', '.join(print_expr(a) for a in node.args)})"
    if isinstance(node, A.Concat):
        return "{" + ", ".join(print_expr(a) for a in node.items) + "}"
    if isinstance(node, A.Repl):
        return "{" + _operand(node.count) + "{" + ", ".join(print_expr(a) for a in node.items) + "}}"
    if isinstance(node, A.Unary):
        return f"{node.op}{_operand(node.operand)}"
    if isinstance(node, A.Binary):
        return f"{_operand(node.left)} {node.op} {_operand(node.right)}"
    if isinstance(node, A.Ternary):
        return f"{_operand(node.cond)} ? {_operand(node.then)} : {_operand(node.other)}"
    if isinstance(node, A.TemporalParen):
        return f"({print_prop(node.prop)})"
    raise TypeError(f"cannot print {type(node).__name__}")


def _operand(node: A.Node) -> str:
    text = print_expr(node)
    return text if isinstance(node, _ATOMIC) else f"({text})"


def print_sequence(seq: A.Sequence) -> str:
    parts = []
    for k, (delay, node) in enumerate(seq.terms):
        term = _operand(node)
        if k == 0 and delay == 0:
            parts.append(term)
        else:
            parts.append(f"##{delay} {term}")
    return " ".join(parts)


def print_prop(node: A.PropNode) -> str:
    if isinstance(node, A.SeqProp):
        return print_sequence(node.seq)
    if isinstance(node, A.Implication):
        arrow = "|->" if node.overlapping else "|=>"
        return f"{print_sequence(node.ante)} {arrow} {print_sequence(node.cons)}"
    if isinstance(node, A.PropAnd):
        return " and ".join(f"({print_prop(p)})" for p in node.items)
    if isinstance(node, A.PropRef):
        return node.name
    raise TypeError(f"cannot print {type(node).__name__}")


def print_property(prop: A.PropertyAst) -> str:
    parts = []
    if prop.clock is not None:
        parts.append(f"@({prop.clock.edge} {prop.clock.signal})")
    if prop.disable is not None:
        parts.append(f"disable iff ({print_expr(prop.disable)})")
    parts.append(print_prop(prop.body))
    return " ".join(parts)
