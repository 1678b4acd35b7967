from __future__ import annotations

import itertools
import json
import threading

import httpx
import pytest
from hypothesis import given, strategies as st

from helpers import FIXTURE_NAMES, fixture
from lemmamine.checker.engine import CheckBudget, check_strengthening
from lemmamine.errors import AuthError, CombinatorialCap, ConfigError, MockExhausted, TransportError
from lemmamine.generators import (ChatGenerator, GeneratorRequest, Message, MockGenerator, TemplateGenerator,
                                  count_templates, enumerate_templates, parse_response, template_vars)
from lemmamine.hdl.design import load_design
from lemmamine.mine import lemma_mine

REQUEST = GeneratorRequest.of([{"role": "user", "content": "hi"}])


def test_parse_response_forms():
    text = """Here you go.
property lemma_1;
  @(posedge clk) disable iff (rst) ~(ack0 && ack1);
endproperty

a1: assert property (@(posedge clk) req0 |-> ##1 ack0);

```systemverilog
ack1 |=> robin   // comment
plain boolean line is ignored
```
"""
    cands = parse_response(text, "m", 3)
    assert [c.source for c in cands] == [
        "property lemma_1;\n  @(posedge clk) disable iff (rst) ~(ack0 && ack1);\nendproperty",
        "a1: assert property (@(posedge clk) req0 |-> ##1 ack0);",
        "ack1 |=> robin",
    ]
    assert all(c.origin == "m" and c.round == 3 for c in cands)


def test_parse_response_deduplicates_and_repairs():
    text = "assert property (a ∧ b |-> c);\nassert property (a && b |->   c);"
    cands = parse_response(text)
    assert len(cands) == 1
    assert any("U+2227" in d for d in cands.diagnostics)


def test_unparseable_fragments_are_kept_with_a_diagnostic():
    cands = parse_response("property p; a |-> ; endproperty")
    assert len(cands) == 1 and cands.diagnostics


def test_empty_response():
    assert len(parse_response("I cannot help with that.")) == 0


def test_mock_generator_replays_then_exhausts(tmp_path):
    path = tmp_path / "script.json"
    path.write_text(json.dumps(["one", "two"]))
    gen = MockGenerator.from_file(path)
    assert [gen.generate(REQUEST), gen.generate(REQUEST)] == ["one", "two"]
    with pytest.raises(MockExhausted):
        gen.generate(REQUEST)
    assert gen.calls == 2


def test_mock_script_must_be_string_list(tmp_path):
    path = tmp_path / "script.json"
    path.write_text(json.dumps({"a": 1}))
    with pytest.raises(ConfigError):
        MockGenerator.from_file(path)


def test_message_roles_validated():
    with pytest.raises(ValueError):
        Message("robot", "x")


def chat(handler, **kw) -> ChatGenerator:
    return ChatGenerator("http://llm.invalid/v1/chat", "m", transport=httpx.MockTransport(handler),
                         backoff=0, **kw)


def test_chat_generator_success_sends_messages_and_sampling(monkeypatch):
    seen = {}

    def handler(request: httpx.Request) -> httpx.Response:
        seen["body"] = json.loads(request.content)
        seen["auth"] = request.headers.get("authorization")
        return httpx.Response(200, json={"choices": [{"message": {"content": "answer"}}]})

    monkeypatch.setenv("TEST_LLM_KEY", "sekret")
    gen = chat(handler, api_key_env="TEST_LLM_KEY", sampling={"temperature": 0.2})
    assert gen.generate(REQUEST) == "answer"
    assert seen["body"] == {"model": "m", "messages": [{"role": "user", "content": "hi"}], "temperature": 0.2}
    assert seen["auth"] == "Bearer sekret"


def test_chat_generator_auth_failure_is_not_retried():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(401)

    with pytest.raises(AuthError):
        chat(handler).generate(REQUEST)
    assert len(calls) == 1


def test_missing_key_variable(monkeypatch):
    monkeypatch.delenv("TEST_LLM_KEY", raising=False)
    with pytest.raises(AuthError):
        chat(lambda r: httpx.Response(200), api_key_env="TEST_LLM_KEY").generate(REQUEST)


def test_chat_generator_retries_rate_limits():
    replies = iter([httpx.Response(429), httpx.Response(503),
                    httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})])
    assert chat(lambda r: next(replies)).generate(REQUEST) == "ok"


def test_chat_generator_gives_up():
    with pytest.raises(TransportError):
        chat(lambda r: httpx.Response(500), retries=2).generate(REQUEST)


def test_chat_generator_missing_text():
    with pytest.raises(TransportError):
        chat(lambda r: httpx.Response(200, json={"choices": []})).generate(REQUEST)


def brute_template_count(k: int, m: int, implications: bool) -> int:
    lits = [(v, s) for v in range(k) for s in (True, False)]
    clauses = set()
    for size in range(1, m + 1):
        for combo in itertools.combinations(lits, size):
            if len({v for v, _ in combo}) == size:
                clauses.add(frozenset(combo))
    return len(clauses) + (len(lits) ** 2 if implications else 0)


@given(st.integers(0, 7), st.integers(1, 3), st.booleans())
def test_template_count_formula(k, m, implications):
    assert count_templates(k, m, implications) == brute_template_count(k, m, implications)


def test_enumeration_matches_count_and_is_ordered():
    ts = fixture("arbiter").ts
    names = template_vars(ts)
    assert names == sorted(names) and len(names) == 5
    cands = enumerate_templates(ts, 2, include_implications=True)
    assert len(cands) == count_templates(5, 2, True)
    texts = cands.texts
    assert texts[:2] == ["ack0", "!ack0"]
    assert "~(ack0 && ack1)" in texts and "ack0 |=> !robin" in texts


def test_combinatorial_cap():
    ts = fixture("arbiter").ts
    with pytest.raises(CombinatorialCap):
        enumerate_templates(ts, 3, limit=50)


def test_template_generator_output_parses_back():
    ts = fixture("arbiter").ts
    text = TemplateGenerator(ts).generate(REQUEST)
    assert parse_response(text).texts == enumerate_templates(ts).texts


def test_token_limits_are_recorded_in_metadata():
    default = chat(lambda r: httpx.Response(200)).describe()
    assert default["kind"] == "llm" and default["token_limit"] == "endpoint default"
    capped = chat(lambda r: httpx.Response(200), sampling={"max_tokens": 4096}).describe()
    assert capped["token_limit"] == 4096 and capped["sampling"] == {"max_tokens": 4096}
    assert MockGenerator(["a"]).describe() == {"kind": "mock", "name": "mock", "responses": 1}


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_single_literal_templates_count_two_per_variable(name):
    ts = fixture(name).ts
    assert len(enumerate_templates(ts, 1)) == 2 * len(template_vars(ts))


def test_templates_ignore_declaration_order():
    body = "always @(posedge clk) begin a <= b; b <= c; c <= a; end endmodule"
    one = load_design(f"module m(input clk, output reg a, output reg b, output reg c); {body}").ts
    two = load_design(f"module m(input clk, output reg c, output reg a, output reg b); {body}").ts
    assert one.vars != two.vars
    assert enumerate_templates(one, 2, True).texts == enumerate_templates(two, 2, True).texts


def test_arbiter_templates_alone_certify():
    d = fixture("arbiter")
    prop, budget = d.compile(), CheckBudget(bmc_bound=30)
    res = lemma_mine(d.ts, prop, enumerate_templates(d.ts, 2), budget, d.lemma_context())
    assert res.certified and res.lemmas
    assert check_strengthening(prop, [c.compiled for c in res.lemmas], budget).certified


fragments = st.sampled_from([
    "property lemma_1;\n  @(posedge clk) disable iff (rst) ~(ack0 && ack1);\nendproperty",
    "assert property (req0 |-> ##1 ack0);",
    "```\nack1 |=> robin\n```",
    "property broken; a |-> ; endproperty",
    "assert property (a ∧ b |-> c);",
    "Some prose without any property.",
    "property p2;\n  !(ack0 && ack1);\nendproperty",
])


@given(st.lists(fragments, max_size=6))
def test_parse_response_is_idempotent(parts):
    first = parse_response("\n\n".join(parts))
    again = parse_response(first.serialize())
    assert again.texts == first.texts
    assert parse_response(again.serialize()).texts == first.texts


def test_mock_keeps_script_order_under_concurrent_calls():
    script = [f"r{k}" for k in range(40)]
    mock = MockGenerator(script)
    seen: list[str] = []
    lock = threading.Lock()

    def worker():
        for _ in range(10):
            text = mock.generate(REQUEST)
            with lock:
                seen.append(text)

    threads = [threading.Thread(target=worker) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert sorted(seen) == sorted(script) and mock.calls == 40
    with pytest.raises(MockExhausted):
        mock.generate(REQUEST)
