"""Text embeddings for few-shot example selection.

The built-in embedder counts HDL keywords and operators over a fixed
vocabulary and hashes every other identifier into a fixed number of
buckets; vectors are L2-normalized. An external sentence-embedding model
can be configured instead; when it cannot be loaded the built-in one is
used and a warning is logged.
"""

from __future__ import annotations

import logging
import re
import zlib
from collections.abc import Sequence
from typing import Protocol

import numpy as np

from ..errors import ProviderError

log = logging.getLogger(__name__)

HDL_VOCAB: tuple[str, ...] = (
    "module", "endmodule", "input", "output", "reg", "wire", "logic", "parameter", "localparam",
    "assign", "always", "posedge", "negedge", "begin", "end", "if", "else", "case", "endcase",
    "default", "task", "endtask", "initial", "property", "endproperty", "assert", "disable", "iff",
    "and", "$onehot", "$onehot0",
    "|->", "|=>", "##", "&&", "||", "!", "~", "&", "|", "^", "==", "!=", "<", "<=", ">", ">=",
    "+", "-", "*", "<<", ">>", "?", "{", "[",
)
HASH_BUCKETS = 256
DIM = len(HDL_VOCAB) + HASH_BUCKETS

_TOKEN = re.compile(r"\$?[A-Za-z_][A-Za-z0-9_$]*|\|->|\|=>|##|&&|\|\||==|!=|<=|>=|<<|>>|[!~&|^<>+\-*?{\[]")
_VOCAB_INDEX = {t: k for k, t in enumerate(HDL_VOCAB)}


class Embedder(Protocol):
    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


def _strip_comments(text: str) -> str:
    text = re.sub(r"/\*.*?\*/", " ", text, flags=re.S)
    return re.sub(r"//[^\n]*", " ", text)


class HashingEmbedder:
    """Keyword counts plus hashed identifier counts, L2-normalized."""

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), DIM))
        for row, text in enumerate(texts):
            for tok in _TOKEN.findall(_strip_comments(text)):
                k = _VOCAB_INDEX.get(tok)
                if k is None:
                    k = len(HDL_VOCAB) + zlib.crc32(tok.encode("utf-8")) % HASH_BUCKETS
                out[row, k] += 1.0
            norm = np.linalg.norm(out[row])
            if norm > 0:
                out[row] /= norm
        return out


class SentenceTransformerEmbedder:
    """Wraps a sentence-transformers model; the import happens on first use."""

    def __init__(self, model_name: str = "all-MiniLM-L6-v2"):
        self.model_name = model_name
        self._model = None

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        if self._model is None:
            try:
                from sentence_transformers import SentenceTransformer
                self._model = SentenceTransformer(self.model_name)
            except Exception as exc:  # import errors, missing weights, no network
                raise ProviderError(f"cannot load embedding model {self.model_name!r}: {exc}") from exc
        vecs = np.asarray(self._model.encode(list(texts), normalize_embeddings=True), dtype=float)
        return vecs.reshape(len(texts), -1)


class FallbackEmbedder:
    """Try ``primary``; on :class:`ProviderError` warn once and use the built-in embedder."""

    def __init__(self, primary: Embedder | None = None):
        self.primary = primary
        self.fallback = HashingEmbedder()
        self.failed = primary is None

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        if not self.failed:
            try:
                return self.primary.embed(texts)
            except ProviderError as exc:
                log.warning("%s; using the built-in embedder", exc)
                self.failed = True
        return self.fallback.embed(texts)


def make_embedder(provider: str | None = None, model: str | None = None) -> Embedder:
    """``provider`` is ``None``/``"builtin"`` or ``"sentence-transformers"``."""
    if provider in (None, "", "builtin"):
        return HashingEmbedder()
    if provider == "sentence-transformers":
        return FallbackEmbedder(SentenceTransformerEmbedder(model or "all-MiniLM-L6-v2"))
    raise ProviderError(f"unknown embedding provider {provider!r}")


def embed(text: str, embedder: Embedder | None = None) -> np.ndarray:
    return (embedder or HashingEmbedder()).embed([text])[0]


def similarity(a: str, b: str, embedder: Embedder | None = None) -> float:
    vecs = (embedder or HashingEmbedder()).embed([a, b])
    return float(vecs[0] @ vecs[1])
