"""A parsed and elaborated design together with its declared properties."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

from ..errors import FrontendError
from ..props import CompiledProperty
from ..ts import TransitionSystem
from .ast import DesignAst
from .elaborate import elaborate
from .parser import parse_design
from .sva import DEFAULT_DEPTH_CAP, LemmaContext, compile_property, compile_text


@dataclass(eq=False)
class Design:
    ast: DesignAst
    ts: TransitionSystem
    source: str = ""
    path: str | None = None
    depth_cap: int = DEFAULT_DEPTH_CAP
    _compiled: dict[str, CompiledProperty] = field(default_factory=dict, repr=False)

    @property
    def name(self) -> str:
        return self.ast.name

    @cached_property
    def property_names(self) -> list[str]:
        return list(self.ast.properties)

    def target_name(self, name: str | None = None) -> str:
        """The property to verify: ``name``, else the first assertion, else the only property."""
        if name is not None:
            if name not in self.ast.properties:
                raise FrontendError(f"design {self.name!r} has no property {name!r} "
                                    f"(available: {', '.join(self.property_names) or 'none'})")
            return name
        if self.ast.assertions:
            return self.ast.assertions[0]
        if len(self.ast.properties) == 1:
            return self.property_names[0]
        raise FrontendError(f"design {self.name!r} declares {len(self.ast.properties)} properties; "
                            "select one by name")

    def compile(self, name: str | None = None) -> CompiledProperty:
        name = self.target_name(name)
        if name not in self._compiled:
            self._compiled[name] = compile_property(self.ast.properties[name], self.ts,
                                                    self.depth_cap, text=name)
        return self._compiled[name]

    def lemma_context(self, name: str | None = None) -> LemmaContext:
        """Lemma reading context for verifying property ``name``."""
        target = self.ast.properties[self.target_name(name)] if self.ast.properties else None
        return LemmaContext(dict(self.ast.properties), target.disable if target else None,
                            self.depth_cap)

    def compile_text(self, text: str, name: str | None = None) -> CompiledProperty:
        """Compile lemma text in the context of target property ``name``."""
        return compile_text(text, self.ts, self.lemma_context(name))


def load_design(text: str, path: str | None = None, depth_cap: int = DEFAULT_DEPTH_CAP) -> Design:
    ast = parse_design(text)
    return Design(ast, elaborate(ast), text, path, depth_cap)


def load_design_file(path: str | Path, depth_cap: int = DEFAULT_DEPTH_CAP) -> Design:
    p = Path(path)
    return load_design(p.read_text(encoding="utf-8"), str(p), depth_cap)
