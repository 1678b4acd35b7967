"""Few-shot prompt assembly and similarity-based example selection."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from string import Template

from ..errors import PoolTooSmall
from ..generators import Message
from .embed import Embedder, HashingEmbedder
from .pool import CotExample, Pool

SYSTEM_MESSAGE = "You are an expert in hardware verification and SystemVerilog assertions."


def read_data(name: str) -> str:
    return (resources.files("lemmamine") / "data" / name).read_text(encoding="utf-8")


def load_template(path: str | Path | None = None) -> str:
    return Path(path).read_text(encoding="utf-8") if path is not None else read_data("prompt_template.txt")


def select_examples(target: str, pool: Pool | Sequence[CotExample], k: int,
                    embedder: Embedder | None = None) -> list[CotExample]:
    """The ``k`` pool entries whose embeddings have the largest dot product with ``target``.

    Ties (equal scores to 12 decimal places) are broken by entry id.
    """
    examples = list(pool.examples if isinstance(pool, Pool) else pool)
    if k < 0:
        raise ValueError("k must be non-negative")
    if k > len(examples):
        raise PoolTooSmall(f"requested {k} examples from a pool of {len(examples)}")
    if k == 0:
        return []
    embedder = embedder or HashingEmbedder()
    vecs = embedder.embed([target] + [e.embedding_text for e in examples])
    scores = vecs[1:] @ vecs[0]
    ranked = sorted(zip(examples, scores), key=lambda p: (-round(float(p[1]), 12), p[0].id))
    return [e for e, _ in ranked[:k]]


def render_example(index: int, ex: CotExample) -> str:
    return Template(read_data("example_template.txt")).substitute(
        index=index, design=ex.design.rstrip(), property=ex.property, reasoning=ex.reasoning,
        lemmas=ex.lemma_text)


@dataclass(frozen=True)
class FewShotPrompt:
    """The fixed instruction template, the chosen examples and the target pair."""

    template: str
    examples: tuple[CotExample, ...]
    design: str
    property: str

    @property
    def k(self) -> int:
        return len(self.examples)

    def render(self) -> str:
        shots = "".join(render_example(i + 1, ex) + "\n" for i, ex in enumerate(self.examples))
        return Template(self.template).substitute(examples=shots, design=self.design.rstrip(),
                                                  property=self.property)

    def messages(self) -> list[Message]:
        return [Message("system", SYSTEM_MESSAGE), Message("user", self.render())]


def build_prompt(design: str, prop: str, pool: Pool | Sequence[CotExample], k: int = 1,
                 embedder: Embedder | None = None, template: str | None = None) -> FewShotPrompt:
    target = f"{design}\n{prop}"
    examples = select_examples(target, pool, k, embedder)
    return FewShotPrompt(template if template is not None else load_template(), tuple(examples), design, prop)
