"""Sources of candidate lemmas and extraction of lemmas from response text."""

from __future__ import annotations

import itertools
import json
import logging
import os
import re
import threading
import time
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from math import comb
from pathlib import Path
from typing import Protocol

import httpx

from .errors import AuthError, CombinatorialCap, ConfigError, FrontendError, MockExhausted, TransportError
from .hdl.lexer import repair_ascii
from .hdl.parser import parse_property
from .hdl.sva import normalize_text
from .mine import Candidate
from .ts import TransitionSystem

log = logging.getLogger(__name__)

ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class Message:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")

    def as_dict(self) -> dict:
        return {"role": self.role, "content": self.content}


@dataclass(frozen=True)
class GeneratorRequest:
    messages: tuple[Message, ...]
    sampling: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("a request needs at least one message")
        if self.messages[-1].role != "user":
            raise ValueError("the last message of a request must come from the user")

    @classmethod
    def of(cls, messages: Iterable[Message | Mapping], sampling: Mapping | None = None) -> GeneratorRequest:
        msgs = tuple(m if isinstance(m, Message) else Message(m["role"], m["content"]) for m in messages)
        return cls(msgs, dict(sampling or {}))


class Generator(Protocol):
    name: str

    def generate(self, request: GeneratorRequest) -> str: ...


# -- scripted mock -----------------------------------------------------------------

class MockGenerator:
    """Returns scripted responses in order; thread-safe so concurrent callers keep the order."""

    def __init__(self, responses: Sequence[str], name: str = "mock"):
        self.responses = list(responses)
        self.name = name
        self.requests: list[GeneratorRequest] = []
        self._next = 0
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str | Path, name: str = "mock") -> MockGenerator:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read mock script {path}: {exc}") from exc
        if not isinstance(data, list) or not all(isinstance(x, str) for x in data):
            raise ConfigError(f"mock script {path} must be a JSON array of strings")
        return cls(data, name)

    def generate(self, request: GeneratorRequest) -> str:
        with self._lock:
            if self._next >= len(self.responses):
                raise MockExhausted(f"all {len(self.responses)} scripted responses were consumed")
            self.requests.append(request)
            text = self.responses[self._next]
            self._next += 1
            return text

    @property
    def calls(self) -> int:
        return self._next

    def describe(self) -> dict:
        return {"kind": "mock", "name": self.name, "responses": len(self.responses)}


# -- chat endpoint -------------------------------------------------------------------

def _dig(data: object, path: str) -> object:
    for part in path.split("."):
        if isinstance(data, list):
            data = data[int(part)]
        elif isinstance(data, dict):
            data = data[part]
        else:
            raise KeyError(part)
    return data


TOKEN_LIMIT_KEYS = ("max_tokens", "max_completion_tokens", "max_output_tokens")


class ChatGenerator:
    """Client for a chat-completion style HTTP endpoint.

    The request body is ``{"model": ..., "messages": [...], **sampling}``;
    the reply text is found at ``response_path``. The API key is read from
    the environment variable ``api_key_env`` and substituted into
    ``headers`` wherever ``{key}`` appears.
    """

    def __init__(self, url: str, model: str, api_key_env: str | None = None,
                 headers: Mapping[str, str] | None = None,
                 response_path: str = "choices.0.message.content",
                 sampling: Mapping[str, object] | None = None, timeout: float = 120.0,
                 retries: int = 3, backoff: float = 1.0, name: str | None = None,
                 transport: httpx.BaseTransport | None = None):
        self.url = url
        self.model = model
        self.api_key_env = api_key_env
        self.headers = dict(headers if headers is not None else {"Authorization": "Bearer {key}"})
        self.response_path = response_path
        self.sampling = dict(sampling or {})
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self.name = name or model
        self.transport = transport

    def describe(self) -> dict:
        """Run metadata; token limits not set in ``sampling`` are left to the endpoint."""
        limit = next((self.sampling[k] for k in TOKEN_LIMIT_KEYS if k in self.sampling), "endpoint default")
        return {"kind": "llm", "name": self.name, "model": self.model, "url": self.url,
                "sampling": dict(self.sampling), "token_limit": limit}

    def _headers(self) -> dict[str, str]:
        key = ""
        if self.api_key_env:
            key = os.environ.get(self.api_key_env, "")
            if not key:
                raise AuthError(f"environment variable {self.api_key_env} is not set")
        out = {"Content-Type": "application/json"}
        for k, v in self.headers.items():
            if "{key}" in v and not key:
                continue
            out[k] = v.replace("{key}", key)
        return out

    def generate(self, request: GeneratorRequest) -> str:
        body = {"model": self.model, "messages": [m.as_dict() for m in request.messages],
                **self.sampling, **request.sampling}
        headers = self._headers()
        last_error = "no attempt made"
        with httpx.Client(timeout=self.timeout, transport=self.transport) as client:
            for attempt in range(self.retries):
                if attempt:
                    time.sleep(self.backoff * 2 ** (attempt - 1))
                try:
                    resp = client.post(self.url, json=body, headers=headers)
                except httpx.HTTPError as exc:
                    last_error = f"{type(exc).__name__}: {exc}"
                    log.warning("generator %s: attempt %d failed: %s", self.name, attempt + 1, last_error)
                    continue
                if resp.status_code in (401, 403):
                    raise AuthError(f"endpoint rejected credentials (HTTP {resp.status_code})")
                if resp.status_code == 429 or resp.status_code >= 500:
                    last_error = f"HTTP {resp.status_code}"
                    log.warning("generator %s: attempt %d failed: %s", self.name, attempt + 1, last_error)
                    continue
                if resp.status_code >= 400:
                    raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                try:
                    text = _dig(resp.json(), self.response_path)
                except (ValueError, KeyError, IndexError) as exc:
                    raise TransportError(f"response has no text at {self.response_path!r}") from exc
                if not isinstance(text, str):
                    raise TransportError(f"response field {self.response_path!r} is not text")
                return text
        raise TransportError(f"giving up after {self.retries} attempts: {last_error}")


# -- candidate sets ------------------------------------------------------------------

@dataclass
class CandidateSet:
    """Distinct lemmas (keyed by normalized text) with the responses they came from."""

    lemmas: list[Candidate] = field(default_factory=list)
    raw_responses: list[str] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)
    _keys: set[str] = field(default_factory=set, repr=False)

    def add(self, cand: Candidate) -> bool:
        key = normalize_text(cand.source)
        if not key or key in self._keys:
            return False
        self._keys.add(key)
        self.lemmas.append(cand)
        return True

    def update(self, other: CandidateSet) -> None:
        for c in other.lemmas:
            self.add(c)
        self.raw_responses.extend(other.raw_responses)
        self.diagnostics.extend(other.diagnostics)

    def __len__(self) -> int:
        return len(self.lemmas)

    def __iter__(self) -> Iterator[Candidate]:
        return iter(self.lemmas)

    @property
    def texts(self) -> list[str]:
        return [normalize_text(c.source) for c in self.lemmas]

    def serialize(self) -> str:
        """Lemmas as property blocks, readable again by :func:`parse_response`."""
        return "\n".join(f"property lemma_{k + 1};\n  {t};\nendproperty" for k, t in enumerate(self.texts))


_BLOCK = re.compile(r"\bproperty\s+\w+\s*;.*?\bendproperty\b", re.S)
_ASSERT_STMT = re.compile(r"(?:\b\w+\s*:\s*)?\bassert\s+property\s*\(", re.S)
_FENCE = re.compile(r"```[^\n]*\n(.*?)```", re.S)
_TEMPORAL = re.compile(r"\|->|\|=>|##")


def _assert_spans(text: str) -> list[tuple[int, int]]:
    spans = []
    for m in _ASSERT_STMT.finditer(text):
        depth, i = 1, m.end()
        while i < len(text) and depth:
            depth += {"(": 1, ")": -1}.get(text[i], 0)
            i += 1
        if depth == 0:
            if i < len(text) and text[i] == ";":
                i += 1
            spans.append((m.start(), i))
    return spans


def parse_response(text: str, origin: str = "", round: int = 0) -> CandidateSet:
    """Extract lemmas from free-form response text.

    Recognized: ``property ... endproperty`` blocks, ``assert property (...)``
    statements, and, inside fenced code blocks, lines using ``|->``, ``|=>``
    or ``##``. Fragments that do not parse are kept (they are classified
    later) and reported in ``diagnostics``.
    """
    out = CandidateSet(raw_responses=[text])
    repaired, repairs = repair_ascii(text)
    for r in repairs:
        out.diagnostics.append(f"{r.position[0]}:{r.position[1]}: replaced U+{ord(r.char):04X} by {r.replacement!r}")
    fragments: list[tuple[int, str]] = []
    taken: list[tuple[int, int]] = []
    for m in _BLOCK.finditer(repaired):
        fragments.append((m.start(), m.group(0)))
        taken.append(m.span())
    for a, b in _assert_spans(repaired):
        if not any(x <= a < y for x, y in taken):
            fragments.append((a, repaired[a:b]))
            taken.append((a, b))
    for m in _FENCE.finditer(repaired):
        offset = m.start(1)
        for line in m.group(1).splitlines(keepends=True):
            start = offset
            offset += len(line)
            body = line.split("//", 1)[0].strip()
            if not body or any(x <= start < y for x, y in taken):
                continue
            if _TEMPORAL.search(body):
                fragments.append((start, body))
    fragments.sort(key=lambda f: f[0])
    for _, frag in fragments:
        try:
            parse_property(frag)
        except FrontendError as exc:
            out.diagnostics.append(f"unparseable fragment {normalize_text(frag)[:80]!r}: {exc.one_line()}")
        out.add(Candidate(frag.strip(), origin, round))
    return out


# -- enumerative templates -----------------------------------------------------------------

def template_vars(ts: TransitionSystem) -> list[str]:
    """Register bits of ``ts`` (monitor bits excluded), name-sorted."""
    return sorted(v for v in ts.vars if not v.startswith("$"))


def _literal(name: str, positive: bool) -> str:
    return name if positive else f"!{name}"


def _clause(names: Sequence[str], signs: Sequence[bool]) -> str:
    if len(names) == 1:
        return _literal(names[0], signs[0])
    if not any(signs):
        return "~(" + " && ".join(names) + ")"
    return " || ".join(_literal(n, s) for n, s in zip(names, signs))


def count_templates(k: int, max_literals: int, include_implications: bool = False) -> int:
    total = sum(comb(k, n) * 2 ** n for n in range(1, max_literals + 1))
    if include_implications:
        total += (2 * k) ** 2
    return total


def enumerate_templates(ts: TransitionSystem, max_literals: int = 2, include_implications: bool = False,
                        limit: int = 10_000, origin: str = "templates") -> CandidateSet:
    """All clauses over register bits with up to ``max_literals`` literals.

    Order: clause size, then variable combination in name order, then sign
    pattern (positive first). With ``include_implications`` one-cycle
    implications ``l1 |=> l2`` between literals are appended.
    """
    names = template_vars(ts)
    if max_literals < 1:
        raise ValueError("max_literals must be at least 1")
    n = count_templates(len(names), max_literals, include_implications)
    if n > limit:
        raise CombinatorialCap(f"{n} templates exceed the limit of {limit}")
    out = CandidateSet()
    for size in range(1, max_literals + 1):
        for combo in itertools.combinations(names, size):
            for signs in itertools.product((True, False), repeat=size):
                out.add(Candidate(_clause(combo, signs), origin))
    if include_implications:
        lits = [(v, s) for v in names for s in (True, False)]
        for (a, sa), (b, sb) in itertools.product(lits, repeat=2):
            out.add(Candidate(f"{_literal(a, sa)} |=> {_literal(b, sb)}", origin))
    return out


class TemplateGenerator:
    """Answers every request with the full template enumeration for ``ts``."""

    def __init__(self, ts: TransitionSystem, max_literals: int = 2, include_implications: bool = False,
                 limit: int = 10_000, name: str = "templates"):
        self.ts = ts
        self.max_literals = max_literals
        self.include_implications = include_implications
        self.limit = limit
        self.name = name

    def describe(self) -> dict:
        return {"kind": "templates", "name": self.name, "max_literals": self.max_literals,
                "include_implications": self.include_implications}

    def generate(self, request: GeneratorRequest) -> str:
        cands = enumerate_templates(self.ts, self.max_literals, self.include_implications, self.limit, self.name)
        return cands.serialize()
