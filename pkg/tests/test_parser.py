from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from lemmamine.errors import HdlSyntaxError, NonAsciiOperator, UnknownSignal, UnsupportedConstruct
from lemmamine.hdl import ast as A
from lemmamine.hdl.lexer import parse_number, repair_ascii, tokenize
from lemmamine.hdl.parser import (parse_design, parse_expression, parse_property, print_expr,
                                  print_property)

a, b, c = A.Ident("a"), A.Ident("b"), A.Ident("c")


# -- lexer ---------------------------------------------------------------------------

@pytest.mark.parametrize("text, expected", [
    ("12", (12, None)), ("4'b1010", (10, 4)), ("8'hFF", (255, 8)), ("'d7", (7, None)), ("3'o7", (7, 3)),
    ("16'd1_000", (1000, 16)),
])
def test_parse_number(text, expected):
    assert parse_number(text) == expected


def test_tokens_carry_positions():
    toks = tokenize("a &&\n  b")
    assert [(t.text, t.pos) for t in toks if t.kind != "eof"] == [("a", (1, 1)), ("&&", (1, 3)), ("b", (2, 3))]


def test_comments_are_skipped():
    toks = tokenize("a // note\n /* block\n comment */ b")
    assert [t.text for t in toks if t.kind != "eof"] == ["a", "b"]


def test_unicode_repair_reports_positions():
    text, repairs = repair_ascii("a ∧ b\n¬c")
    assert text == "a && b\n!c"
    assert [(r.char, r.replacement, r.position) for r in repairs] == [
        ("∧", "&&", (1, 3)), ("¬", "!", (2, 1))]


def test_unrepaired_non_ascii_names_the_fix():
    with pytest.raises(NonAsciiOperator) as err:
        tokenize("a ∧ b")
    assert err.value.hint == "&&" and err.value.position == (1, 3)
    with pytest.raises(NonAsciiOperator) as err:
        tokenize("a ∘ b")
    assert err.value.hint is None


# -- expressions ---------------------------------------------------------------------

def test_precedence():
    assert parse_expression("a || b && c") == A.Binary("||", a, A.Binary("&&", b, c))
    assert parse_expression("a == b & c") == A.Binary("&", A.Binary("==", a, b), c)
    assert parse_expression("!a && b") == A.Binary("&&", A.Unary("!", a), b)
    assert parse_expression("a -> b -> c") == A.Binary("->", a, A.Binary("->", b, c))
    assert parse_expression("a ? b : c ? a : b") == A.Ternary(a, b, A.Ternary(c, a, b))


def test_selects_and_concat():
    assert parse_expression("x[3:0]") == A.Slice("x", A.Number(3), A.Number(0))
    assert parse_expression("{a, b}") == A.Concat((a, b))
    assert parse_expression("{2{a}}") == A.Repl(A.Number(2), (a,))
    assert parse_expression("$onehot({a, b})") == A.SysCall("$onehot", (A.Concat((a, b)),))


def test_syntax_error_has_position_and_expectation():
    with pytest.raises(HdlSyntaxError) as err:
        parse_expression("a +")
    assert err.value.position == (1, 4) and err.value.expected == "expression"


def test_unknown_signal():
    with pytest.raises(UnknownSignal):
        parse_expression("a && q", signals={"a"})


names = st.sampled_from(["a", "b", "c", "x"])
numbers = st.one_of(st.integers(0, 9).map(A.Number),
                    st.integers(1, 6).flatmap(lambda w: st.integers(0, 2 ** w - 1).map(lambda v: A.Number(v, w))))
leaves = st.one_of(names.map(A.Ident), numbers, st.builds(A.Index, names, st.integers(0, 3).map(A.Number)))
UNARY = ["!", "~", "-", "&", "|", "^", "~&", "~|"]
BINARY = ["||", "&&", "|", "^", "&", "==", "!=", "<", "<=", ">", ">=", "<<", ">>", "+", "-", "*", "->", "<->"]

expressions = st.recursive(leaves, lambda kids: st.one_of(
    st.builds(A.Unary, st.sampled_from(UNARY), kids),
    st.builds(A.Binary, st.sampled_from(BINARY), kids, kids),
    st.builds(A.Ternary, kids, kids, kids),
    st.builds(lambda xs: A.Concat(tuple(xs)), st.lists(kids, min_size=1, max_size=3)),
), max_leaves=8)


@given(expressions)
def test_expression_print_parse_round_trip(node):
    assert parse_expression(print_expr(node)) == node


# -- properties ----------------------------------------------------------------------

def test_arbiter_property_shape():
    p = parse_property("@(posedge clk) disable iff (rst) req1 == 1 && ack0 == 1 |-> ##1 ack1 == 1")
    assert p.clock == A.Clock("posedge", "clk") and p.disable == A.Ident("rst")
    assert isinstance(p.body, A.Implication) and p.body.overlapping
    assert p.body.cons.terms[0][0] == 1 and p.body.cons.length == 1


def test_wrappers_are_accepted():
    body = "a |=> b"
    bare = parse_property(body)
    assert parse_property(f"property p; {body}; endproperty").body == bare.body
    assert parse_property(f"assert property ({body});").body == bare.body
    assert parse_property(f"chk: assert property ({body})").name == "chk"


def test_sequence_splicing():
    p = parse_property("a ##1 (b ##2 c) |-> c")
    assert p.body.ante.terms == ((0, a), (1, b), (2, c))


@pytest.mark.parametrize("text, error", [
    ("a |-> ##0 b", HdlSyntaxError),
    ("a |-> ##[1:2] b", HdlSyntaxError),
    ("a until b", UnsupportedConstruct),
    ("a |-> b or c", UnsupportedConstruct),
    ("not a", UnsupportedConstruct),
    ("s_eventually a", UnsupportedConstruct),
    ("$past(a)", UnsupportedConstruct),
    ("(a |-> b) && c", HdlSyntaxError),
])
def test_property_subset_errors(text, error):
    with pytest.raises(error):
        parse_property(text)


def test_property_reference():
    inner = parse_property("a |-> b")
    p = parse_property("inner and (c |=> a)", signals={"a", "b", "c"}, symbols={"inner": inner})
    assert isinstance(p.body, A.PropAnd) and p.body.items[0] == A.PropRef("inner", inner)


bool_terms = st.one_of(names.map(A.Ident), st.builds(A.Unary, st.just("!"), names.map(A.Ident)),
                       st.builds(A.Binary, st.sampled_from(["&&", "||", "=="]), names.map(A.Ident),
                                 names.map(A.Ident)))


@st.composite
def sequences(draw):
    n = draw(st.integers(1, 3))
    first = draw(st.integers(0, 2))
    terms = [(first, draw(bool_terms))] + [(draw(st.integers(1, 2)), draw(bool_terms)) for _ in range(n - 1)]
    return A.Sequence(tuple(terms))


@st.composite
def properties(draw):
    def one():
        if draw(st.booleans()):
            ante = draw(sequences())
            if ante.terms[0][0] != 0:
                ante = A.Sequence(((0, ante.terms[0][1]),) + ante.terms[1:])
            return A.Implication(ante, draw(sequences()), draw(st.booleans()))
        return A.SeqProp(draw(sequences()))
    k = draw(st.integers(1, 2))
    body = one() if k == 1 else A.PropAnd(tuple(one() for _ in range(k)))
    clock = A.Clock("posedge", "clk") if draw(st.booleans()) else None
    disable = draw(st.one_of(st.none(), names.map(A.Ident)))
    return A.PropertyAst(body, clock, disable)


@given(properties())
def test_property_print_parse_round_trip(prop):
    assert parse_property(print_property(prop)) == prop


# -- designs -------------------------------------------------------------------------

def test_design_parse_collects_items():
    d = parse_design("""
        module m #(parameter W = 2) (input clk, input rst, input [W-1:0] d, output reg [W-1:0] q);
          wire z = d[0];
          always @(posedge clk) begin
            if (rst) q <= 0; else q <= d;
          end
          property p; @(posedge clk) q == q; endproperty
          a1: assert property (p);
        endmodule""")
    assert d.name == "m" and d.clock == "clk"
    assert d.ports == ["clk", "rst", "d", "q"]
    assert d.decls["q"].width == 2 and d.decls["q"].is_reg
    assert "p" in d.properties and d.assertions == ["p"]
    assert len(d.assigns) == 1


@pytest.mark.parametrize("item", [
    "integer i;",
    "always @* begin end",
    "sub u(.a(clk));",
    "function f; endfunction",
    "generate endgenerate",
])
def test_design_subset_errors(item):
    with pytest.raises(UnsupportedConstruct):
        parse_design(f"module m(input clk); {item} endmodule")


def test_loops_are_unsupported():
    with pytest.raises(UnsupportedConstruct) as err:
        parse_design("module m(input clk, output reg q); always @(posedge clk) for (;;) q <= 1; endmodule")
    assert err.value.position is not None


def test_multiple_clocks_rejected():
    with pytest.raises(UnsupportedConstruct):
        parse_design("""module m(input c1, input c2, output reg a, output reg b);
            always @(posedge c1) a <= 1;
            always @(posedge c2) b <= 1;
        endmodule""")


def test_missing_endmodule():
    with pytest.raises(HdlSyntaxError):
        parse_design("module m(input clk);")
