"""The single-prompt and conversational lemma-mining loops.

``run_non_agentic`` builds one few-shot prompt, draws ``n`` independent
responses to it and searches the union of their lemmas once.
``run_agentic`` holds a conversation: each round draws one response,
searches the fresh lemmas and then everything proposed so far, and, when
neither search succeeds, answers with per-lemma feedback.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

from ..checker.engine import CheckBudget, Status, kinduction
from ..errors import GeneratorError
from ..generators import CandidateSet, Generator, GeneratorRequest, Message, parse_response
from ..hdl.design import Design, load_design_file
from ..hdl.parser import print_property
from ..hdl.sva import LemmaContext
from ..mine import ClassifiedLemma, LemmaStatus, StrengtheningResult, classify_all, lemma_mine
from ..props import CompiledProperty
from .embed import Embedder
from .pool import Pool, default_pool
from .prompt import FewShotPrompt, build_prompt, read_data

log = logging.getLogger(__name__)

MAX_SAMPLES = 5


@dataclass(eq=False)
class MiningTask:
    """A design and the name of the property to strengthen."""

    design: Design
    property_name: str | None = None
    id: str = ""
    tags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        self.property_name = self.design.target_name(self.property_name)
        if not self.id:
            self.id = f"{self.design.name}.{self.property_name}"

    @classmethod
    def from_file(cls, path: str | Path, prop: str | None = None, id: str = "",
                  tags: Sequence[str] = ()) -> MiningTask:
        return cls(load_design_file(path), prop, id, tuple(tags))

    @cached_property
    def compiled(self) -> CompiledProperty:
        return self.design.compile(self.property_name)

    @cached_property
    def context(self) -> LemmaContext:
        return self.design.lemma_context(self.property_name)

    @property
    def property_text(self) -> str:
        body = print_property(self.design.ast.properties[self.property_name])
        return f"property {self.property_name};\n  {body};\nendproperty"


@dataclass(eq=False)
class RunOutcome:
    """Everything a run produced; counters are over all distinct candidates it saw."""

    task: str
    mode: str
    generator: str
    result: StrengtheningResult | None = None
    rounds: list[CandidateSet] = field(default_factory=list)
    classified: list[ClassifiedLemma] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    prompt: str = ""
    messages: list[Message] = field(default_factory=list)
    error: str | None = None
    note: str | None = None
    generator_info: dict = field(default_factory=dict)

    @property
    def total_lemmas(self) -> int:
        return len(self.classified)

    @property
    def correct(self) -> int:
        return sum(c.usable for c in self.classified)

    @property
    def one_inductive(self) -> int:
        return sum(c.status is LemmaStatus.INDUCTIVE for c in self.classified)

    @property
    def solved(self) -> bool:
        return self.result is not None and self.result.solved

    @property
    def lemmas(self) -> list[str]:
        return self.result.lemma_texts if self.solved else []

    @property
    def lemma_mine_calls(self) -> int:
        return sum(e["event"] == "lemma_mine" for e in self.events)

    def counters(self) -> dict:
        return {"total_lemmas": self.total_lemmas, "correct": self.correct,
                "one_inductive": self.one_inductive, "solved": self.solved}

    def as_dict(self) -> dict:
        return {
            "task": self.task,
            "mode": self.mode,
            "generator": self.generator,
            **self.counters(),
            "lemmas": self.lemmas,
            "note": self.note,
            "generator_info": self.generator_info,
            "error": self.error,
            "rounds": [c.texts for c in self.rounds],
            "classified": [c.as_dict() for c in self.classified],
            "result": self.result.as_dict() if self.result is not None else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def events_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.events)


def _precheck(task: MiningTask, budget: CheckBudget, outcome: RunOutcome) -> bool:
    """False when the property needs no lemmas (it is inductive) or cannot be proved (falsified)."""
    verdict = kinduction(task.compiled, budget)
    outcome.events.append({"event": "precheck", "status": verdict.status.value, "bound": verdict.bound})
    if verdict.status is Status.INDUCTIVE:
        outcome.note = "property is inductive without lemmas"
        return False
    if verdict.status is Status.FALSIFIED:
        outcome.note = f"property is falsified at depth {verdict.depth}"
        return False
    return True


def _prompt(task: MiningTask, k: int, pool: Pool | None, embedder: Embedder | None,
            template: str | None) -> FewShotPrompt:
    if k > 0 and pool is None:
        pool = default_pool()
    return build_prompt(task.design.source, task.property_text, pool or Pool(), k, embedder, template)


def _describe(generator: Generator) -> dict:
    describe = getattr(generator, "describe", None)
    return describe() if callable(describe) else {"kind": type(generator).__name__}


def _check_samples(n: int) -> None:
    if not 1 <= n <= MAX_SAMPLES:
        raise ValueError(f"the sample/round count must be between 1 and {MAX_SAMPLES}, got {n}")


def _search(task: MiningTask, cands: CandidateSet, budget: CheckBudget, cache: dict,
            outcome: RunOutcome, round: int, which: str) -> StrengtheningResult:
    result = lemma_mine(task.design.ts, task.compiled, cands.lemmas, budget, task.context, cache)
    outcome.events.append({"event": "lemma_mine", "round": round, "set": which, "size": len(cands),
                           "solved": result.solved, "lemmas": result.lemma_texts})
    return result


def _finish(task: MiningTask, outcome: RunOutcome, seen: CandidateSet, budget: CheckBudget,
            cache: dict) -> RunOutcome:
    outcome.classified = classify_all(task.design.ts, task.compiled, seen.lemmas, budget, task.context, cache)
    outcome.events.append({"event": "done", **outcome.counters()})
    return outcome


def run_non_agentic(task: MiningTask, generator: Generator, k: int = 1, n: int = MAX_SAMPLES,
                    budget: CheckBudget | None = None, pool: Pool | None = None,
                    embedder: Embedder | None = None, template: str | None = None) -> RunOutcome:
    """One fixed prompt, ``n`` samples, one search over the union of their lemmas."""
    _check_samples(n)
    budget = budget or CheckBudget()
    name = getattr(generator, "name", type(generator).__name__)
    outcome = RunOutcome(task.id, "nonagentic", name, generator_info=_describe(generator))
    seen = CandidateSet()
    cache: dict[str, ClassifiedLemma] = {}
    if not _precheck(task, budget, outcome):
        return _finish(task, outcome, seen, budget, cache)
    prompt = _prompt(task, k, pool, embedder, template)
    outcome.messages = prompt.messages()
    outcome.prompt = outcome.messages[-1].content
    request = GeneratorRequest.of(outcome.messages)
    for s in range(1, n + 1):
        outcome.events.append({"event": "generate", "round": 1, "sample": s, "messages": len(request.messages)})
        try:
            text = generator.generate(request)
        except GeneratorError as exc:
            outcome.error = f"{type(exc).__name__}: {exc}"
            outcome.events.append({"event": "error", "sample": s, "message": outcome.error})
            return _finish(task, outcome, seen, budget, cache)
        cands = parse_response(text, name, 1)
        outcome.rounds.append(cands)
        seen.update(cands)
    outcome.result = _search(task, seen, budget, cache, outcome, 1, "union")
    return _finish(task, outcome, seen, budget, cache)


def run_agentic(task: MiningTask, generator: Generator, k: int = 1, n: int = MAX_SAMPLES,
                budget: CheckBudget | None = None, pool: Pool | None = None,
                embedder: Embedder | None = None, template: str | None = None) -> RunOutcome:
    """Up to ``n`` rounds of generate, search, and feedback; stops at the first success."""
    _check_samples(n)
    budget = budget or CheckBudget()
    name = getattr(generator, "name", type(generator).__name__)
    outcome = RunOutcome(task.id, "agentic", name, generator_info=_describe(generator))
    seen = CandidateSet()
    cache: dict[str, ClassifiedLemma] = {}
    if not _precheck(task, budget, outcome):
        return _finish(task, outcome, seen, budget, cache)
    prompt = _prompt(task, k, pool, embedder, template)
    messages = prompt.messages()
    outcome.prompt = messages[-1].content
    for r in range(1, n + 1):
        outcome.events.append({"event": "generate", "round": r, "sample": 1, "messages": len(messages)})
        try:
            text = generator.generate(GeneratorRequest.of(messages))
        except GeneratorError as exc:
            outcome.error = f"{type(exc).__name__}: {exc}"
            outcome.events.append({"event": "error", "round": r, "message": outcome.error})
            break
        fresh = parse_response(text, name, r)
        outcome.rounds.append(fresh)
        seen.update(fresh)
        result = _search(task, fresh, budget, cache, outcome, r, "round")
        outcome.result = result
        if result.solved:
            break
        result = _search(task, seen, budget, cache, outcome, r, "all")
        outcome.result = result
        if result.solved:
            break
        if r < n:
            feedback = generate_repair_msg(
                classify_all(task.design.ts, task.compiled, fresh.lemmas, budget, task.context, cache), r)
            messages = messages + [Message("assistant", text), Message("user", feedback)]
            outcome.events.append({"event": "feedback", "round": r, "reminder": r % 2 == 0,
                                   "messages": len(messages)})
    outcome.messages = messages
    return _finish(task, outcome, seen, budget, cache)


_STATUS_LINES = {
    LemmaStatus.INDUCTIVE: "holds; it is inductive on its own",
    LemmaStatus.HOLDS_TO_BOUND: "holds up to the checked depth but is not inductive on its own",
    LemmaStatus.FALSIFIED: "does not hold; the design violates it",
    LemmaStatus.UNKNOWN: "could not be decided within the time limit",
}


def _one_line(text: str, limit: int = 160) -> str:
    text = " ".join(text.split())
    return text if len(text) <= limit else text[: limit - 3] + "..."


def generate_repair_msg(classified: Sequence[ClassifiedLemma], round: int) -> str:
    """Feedback on one round's lemmas: a status line per lemma, no counterexamples.

    On even rounds a reminder of the task and output format is appended.
    """
    lines = ["Your lemmas, taken together with the property, are not yet an inductive "
             "invariant, so the proof does not go through.", ""]
    if classified:
        lines.append("Status of each proposed lemma:")
        for i, c in enumerate(classified, 1):
            if c.status is LemmaStatus.ILL_FORMED:
                diag = c.diagnostics[0] if c.diagnostics else "unreadable"
                status = f"could not be parsed or compiled ({_one_line(diag)})"
            else:
                status = _STATUS_LINES[c.status]
            lines.append(f"{i}. {_one_line(c.normalized or c.source)}: {status}")
    else:
        lines.append("No lemmas could be found in your answer.")
    lines.append("")
    lines.append("Please revise: drop lemmas that do not hold and add lemmas that exclude the "
                 "unreachable states from which the induction step fails.")
    if round % 2 == 0:
        lines.append("")
        lines.append(read_data("repair_reminder.txt").strip())
    return "\n".join(lines) + "\n"
