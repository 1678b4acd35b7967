"""Worked examples (design, property, lemmas, reasoning) used as few-shot context.

A pool is a directory with one subdirectory per example holding
``design.sv``, ``property.sva``, ``lemmas.sva`` and ``reasoning.md``. Every
entry is checked when loaded: its lemmas together with its property must
certify as an inductive strengthening of its own design. Entries that do
not are rejected with a warning.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from ..checker.engine import CheckBudget, check_strengthening
from ..errors import FrontendError, LemmaMineError
from ..generators import parse_response
from ..hdl.design import load_design
from ..hdl.parser import parse_property
from ..hdl.sva import LemmaContext, compile_text, normalize_text

log = logging.getLogger(__name__)

POOL_FILES = ("design.sv", "property.sva", "lemmas.sva", "reasoning.md")


@dataclass(frozen=True)
class CotExample:
    id: str
    design: str
    property: str
    lemmas: tuple[str, ...]
    reasoning: str

    @property
    def lemma_text(self) -> str:
        return "\n".join(f"property lemma_{k + 1};\n  {t};\nendproperty" for k, t in enumerate(self.lemmas))

    @property
    def embedding_text(self) -> str:
        return f"{self.design}\n{self.property}"


@dataclass
class Pool:
    examples: list[CotExample] = field(default_factory=list)
    rejected: list[tuple[str, str]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.examples)

    @property
    def ids(self) -> list[str]:
        return [e.id for e in self.examples]


def certify_example(ex: CotExample, budget: CheckBudget | None = None) -> str | None:
    """``None`` when the example certifies, otherwise the reason it does not."""
    budget = budget or CheckBudget(timeout=20)
    try:
        design = load_design(ex.design)
        target = parse_property(ex.property, signals=set(design.ts.signals))
        prop = compile_text(ex.property, design.ts)
        context = LemmaContext(dict(design.ast.properties), target.disable)
        lemmas = [compile_text(t, design.ts, context) for t in ex.lemmas]
    except FrontendError as exc:
        return f"{type(exc).__name__}: {exc.one_line()}"
    if not lemmas:
        return "no lemmas"
    cert = check_strengthening(prop, lemmas, budget)
    if not cert.certified:
        return f"lemmas do not certify ({cert.status.value})"
    return None


def read_example(path: Path) -> CotExample:
    missing = [f for f in POOL_FILES if not (path / f).is_file()]
    if missing:
        raise LemmaMineError(f"pool entry {path.name!r} lacks {', '.join(missing)}")
    text = {f: (path / f).read_text(encoding="utf-8") for f in POOL_FILES}
    lemmas = tuple(normalize_text(c.source) for c in parse_response(text["lemmas.sva"]))
    return CotExample(path.name, text["design.sv"].strip() + "\n", text["property.sva"].strip(),
                      lemmas, text["reasoning.md"].strip())


def load_pool(root: str | Path | None = None, budget: CheckBudget | None = None) -> Pool:
    """Read and certify every entry under ``root`` (default: the bundled pool), sorted by id."""
    base = Path(root) if root is not None else Path(str(resources.files("lemmamine") / "data" / "pool"))
    if not base.is_dir():
        raise LemmaMineError(f"pool directory {str(base)!r} does not exist")
    pool = Pool()
    for sub in sorted(p for p in base.iterdir() if p.is_dir()):
        try:
            ex = read_example(sub)
        except LemmaMineError as exc:
            reason = str(exc)
        else:
            reason = certify_example(ex, budget)
        if reason is None:
            pool.examples.append(ex)
        else:
            log.warning("rejecting pool entry %s: %s", sub.name, reason)
            pool.rejected.append((sub.name, reason))
    return pool


@lru_cache(maxsize=8)
def _cached(root: str | None) -> Pool:
    return load_pool(root)


def default_pool(root: str | Path | None = None) -> Pool:
    """Certified pool, loaded once per process and directory."""
    return _cached(str(root) if root is not None else None)
