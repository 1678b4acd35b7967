"""Candidate classification and the search for an inductive strengthening."""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Mapping, MutableMapping
from dataclasses import dataclass, field
from enum import Enum

from .checker.engine import Certificate, CertStatus, CheckBudget, CheckVerdict, Status, bmc, check_strengthening, kinduction
from .errors import FrontendError, LemmaMineError
from .hdl.sva import LemmaContext, compile_text, normalize_text
from .props import CompiledProperty
from .ts import TransitionSystem

log = logging.getLogger(__name__)


class LemmaStatus(str, Enum):
    INDUCTIVE = "inductive"
    HOLDS_TO_BOUND = "holds_to_bound"
    FALSIFIED = "falsified"
    ILL_FORMED = "ill_formed"
    UNKNOWN = "unknown"


_RANK = {LemmaStatus.INDUCTIVE: 0, LemmaStatus.HOLDS_TO_BOUND: 1}


@dataclass(frozen=True)
class Candidate:
    """A lemma proposal; ``origin`` names the generator, ``round`` the prompting round."""

    source: str
    origin: str = ""
    round: int = 0

    def as_dict(self) -> dict:
        return {"source": self.source, "origin": self.origin, "round": self.round}

    @classmethod
    def from_dict(cls, data: Mapping) -> Candidate:
        return cls(str(data["source"]), str(data.get("origin", "")), int(data.get("round", 0)))


def candidates_from_json(text: str) -> list[Candidate]:
    return [Candidate.from_dict(d) for d in json.loads(text)]


def candidates_to_json(cands: Iterable[Candidate]) -> str:
    return json.dumps([c.as_dict() for c in cands], indent=2)


@dataclass(frozen=True, eq=False)
class ClassifiedLemma:
    source: str
    normalized: str
    status: LemmaStatus
    compiled: CompiledProperty | None = None
    verdict: CheckVerdict | None = None
    diagnostics: tuple[str, ...] = ()
    origin: str = ""
    round: int = 0

    @property
    def usable(self) -> bool:
        return self.status in _RANK

    def as_dict(self) -> dict:
        out = {"source": self.source, "normalized": self.normalized, "status": self.status.value,
               "origin": self.origin, "round": self.round}
        if self.diagnostics:
            out["diagnostics"] = list(self.diagnostics)
        if self.verdict is not None:
            out["verdict"] = self.verdict.as_dict(with_trace=False)
        return out


def classify(ts: TransitionSystem, prop: CompiledProperty | None, candidate: Candidate | str,
             budget: CheckBudget, context: LemmaContext | None = None) -> ClassifiedLemma:
    """Parse, compile and check one candidate; every failure becomes a status."""
    cand = Candidate(candidate) if isinstance(candidate, str) else candidate
    normalized = normalize_text(cand.source)
    meta = {"origin": cand.origin, "round": cand.round}
    if prop is not None and prop.base is not ts:
        raise LemmaMineError("property was compiled against a different system")
    if not normalized:
        return ClassifiedLemma(cand.source, normalized, LemmaStatus.ILL_FORMED,
                               diagnostics=("empty lemma",), **meta)
    try:
        compiled = compile_text(cand.source, ts, context)
    except (FrontendError, RecursionError) as exc:
        msg = exc.one_line() if isinstance(exc, FrontendError) else "expression nested too deeply"
        return ClassifiedLemma(cand.source, normalized, LemmaStatus.ILL_FORMED,
                               diagnostics=(f"{type(exc).__name__}: {msg}",), **meta)
    verdict = kinduction(compiled, budget)
    if verdict.status is Status.UNKNOWN:
        # a step-check timeout does not hide a successful bounded check
        fallback = bmc(compiled, budget)
        if fallback.status is not Status.UNKNOWN:
            verdict = fallback
    status = {
        Status.INDUCTIVE: LemmaStatus.INDUCTIVE,
        Status.HOLDS_TO_BOUND: LemmaStatus.HOLDS_TO_BOUND,
        Status.FALSIFIED: LemmaStatus.FALSIFIED,
        Status.UNKNOWN: LemmaStatus.UNKNOWN,
    }[verdict.status]
    diags = (verdict.reason,) if verdict.reason else ()
    return ClassifiedLemma(cand.source, normalized, status, compiled, verdict, diags, **meta)


def order_candidates(classified: Iterable[ClassifiedLemma]) -> list[ClassifiedLemma]:
    """Inductive before holds-to-bound, then byte order of normalized text; duplicates dropped."""
    usable = [c for c in classified if c.usable]
    usable.sort(key=lambda c: (_RANK[c.status], c.normalized.encode("utf-8")))
    seen: set[str] = set()
    out = []
    for c in usable:
        if c.normalized not in seen:
            seen.add(c.normalized)
            out.append(c)
    return out


@dataclass(frozen=True)
class LogEntry:
    kind: str  # "single" | "prefix"
    size: int
    lemmas: tuple[str, ...]
    certificate: Certificate

    def as_dict(self) -> dict:
        return {"kind": self.kind, "size": self.size, "lemmas": list(self.lemmas),
                "result": self.certificate.status.value,
                **({"failed": self.certificate.failed} if self.certificate.failed else {})}


@dataclass(frozen=True, eq=False)
class StrengtheningResult:
    """Outcome of one search.

    ``certified`` is true when the returned lemmas together with the
    property form an inductive invariant. ``lemmas`` is empty either when
    nothing certified or when the property is inductive on its own
    (``via == "prefix"`` with ``prefix_length == 0``).
    """

    lemmas: tuple[ClassifiedLemma, ...]
    certified: bool
    via: str | None = None
    prefix_length: int | None = None
    log: tuple[LogEntry, ...] = ()
    classified: tuple[ClassifiedLemma, ...] = ()
    stats: Mapping[str, int] = field(default_factory=dict)

    @property
    def solved(self) -> bool:
        return self.certified and bool(self.lemmas)

    @property
    def lemma_texts(self) -> list[str]:
        return [c.normalized for c in self.lemmas]

    def as_dict(self) -> dict:
        return {
            "certified": self.certified,
            "solved": self.solved,
            "via": self.via,
            "prefix_length": self.prefix_length,
            "lemmas": self.lemma_texts,
            "certificate_log": [e.as_dict() for e in self.log],
            "classified": [c.as_dict() for c in self.classified],
            "stats": dict(self.stats),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def _stats(classified: Iterable[ClassifiedLemma], log_entries: Iterable[LogEntry]) -> dict[str, int]:
    counts = {s.value: 0 for s in LemmaStatus}
    total = 0
    for c in classified:
        counts[c.status.value] += 1
        total += 1
    counts["total"] = total
    counts["certificate_checks"] = 0
    counts["certificate_timeouts"] = 0
    for e in log_entries:
        counts["certificate_checks"] += 1
        if e.certificate.status is CertStatus.UNKNOWN:
            counts["certificate_timeouts"] += 1
    return counts


def classify_all(ts: TransitionSystem, prop: CompiledProperty, candidates: Iterable[Candidate | str],
                 budget: CheckBudget, context: LemmaContext | None = None,
                 cache: MutableMapping[str, ClassifiedLemma] | None = None) -> list[ClassifiedLemma]:
    """Classify each distinct candidate once (by normalized text), in input order.

    ``cache`` maps normalized text to an earlier classification and lets
    repeated searches over growing candidate sets skip re-checking.
    """
    out: list[ClassifiedLemma] = []
    seen: set[str] = set()
    for cand in candidates:
        cand = Candidate(cand) if isinstance(cand, str) else cand
        key = normalize_text(cand.source)
        if key in seen:
            continue
        seen.add(key)
        hit = cache.get(key) if cache is not None else None
        if hit is None:
            hit = classify(ts, prop, cand, budget, context)
            if cache is not None:
                cache[key] = hit
        out.append(hit)
    return out


def lemma_mine(ts: TransitionSystem, prop: CompiledProperty, candidates: Iterable[Candidate | str],
               budget: CheckBudget, context: LemmaContext | None = None,
               cache: MutableMapping[str, ClassifiedLemma] | None = None) -> StrengtheningResult:
    """Search the ordered candidates for an inductive strengthening of ``prop``.

    First every inductive lemma is tried alone; then prefixes of the ordered
    list are tried from length 0 upward. The first certified set wins.
    """
    classified = classify_all(ts, prop, candidates, budget, context, cache)
    ordered = order_candidates(classified)
    entries: list[LogEntry] = []

    def attempt(kind: str, lemmas: list[ClassifiedLemma]) -> bool:
        cert = check_strengthening(prop, [c.compiled for c in lemmas], budget)
        entries.append(LogEntry(kind, len(lemmas), tuple(c.normalized for c in lemmas), cert))
        return cert.certified

    def result(lemmas, certified, via, p):
        return StrengtheningResult(tuple(lemmas), certified, via, p, tuple(entries), tuple(classified),
                                   _stats(classified, entries))

    for c in ordered:
        if c.status is LemmaStatus.INDUCTIVE and attempt("single", [c]):
            return result([c], True, "single", None)
    for p in range(len(ordered) + 1):
        if attempt("prefix", ordered[:p]):
            return result(ordered[:p], True, "prefix", p)
    return result([], False, None, None)
