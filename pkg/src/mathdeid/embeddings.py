"""Message embedding providers and the cosine geometry used by segmentation.

Two providers ship: a deterministic hashed term-frequency embedder (offline,
used by the test suite and the default CLI configuration) and an optional
sentence-transformers wrapper for the all-MiniLM-L6-v2 encoder.
"""

from __future__ import annotations

import threading
import zlib
from typing import Protocol, Sequence

import numpy as np

from .density import tokenize


class EmbeddingProvider(Protocol):
    provider_id: str
    dimension: int

    def embed(self, text: str) -> np.ndarray: ...

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray: ...


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; defined as 0 when either vector is zero."""
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


class HashedTfEmbedder:
    """Deterministic hashed term-frequency vectors, unit-normalized.

    Identical text always embeds identically across runs and processes
    (buckets come from crc32, not Python's randomized hash). Empty or
    whitespace-only text maps to the zero vector.
    """

    def __init__(self, dimension: int = 256):
        self.provider_id = f"hashed-tf-{dimension}"
        self.dimension = dimension

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dimension, dtype=np.float64)
        for tok in tokenize(text):
            vec[zlib.crc32(tok.encode("utf-8")) % self.dimension] += 1.0
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec /= norm
        return vec

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        return np.stack([self.embed(t) for t in texts]) if texts else np.zeros((0, self.dimension))


class SentenceTransformerEmbedder:
    """Wrapper around a sentence-transformers encoder (reference: all-MiniLM-L6-v2)."""

    def __init__(self, model_name: str = "all-MiniLM-L6-v2"):
        from sentence_transformers import SentenceTransformer  # lazy heavy import

        self._model = SentenceTransformer(model_name)
        self.provider_id = model_name
        self.dimension = int(self._model.get_sentence_embedding_dimension())

    def embed(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dimension))
        out = self._model.encode(list(texts), normalize_embeddings=True)
        return np.asarray(out, dtype=np.float64)


class CachingEmbedder:
    """Per-text cache in front of a provider.

    Reads are lock-free on hits; misses are computed under a lock so
    concurrent workers never duplicate provider calls for the same text.
    """

    def __init__(self, inner: EmbeddingProvider):
        self.inner = inner
        self.provider_id = inner.provider_id
        self.dimension = inner.dimension
        self._cache: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def embed(self, text: str) -> np.ndarray:
        hit = self._cache.get(text)
        if hit is not None:
            return hit
        with self._lock:
            hit = self._cache.get(text)
            if hit is None:
                hit = self.inner.embed(text)
                self._cache[text] = hit
        return hit

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        missing = [t for t in texts if t not in self._cache]
        if missing:
            with self._lock:
                todo = [t for t in dict.fromkeys(missing) if t not in self._cache]
                if todo:
                    vecs = self.inner.embed_batch(todo)
                    for t, v in zip(todo, vecs):
                        self._cache[t] = v
        if not texts:
            return np.zeros((0, self.dimension))
        return np.stack([self._cache[t] for t in texts])


def make_embedder(name: str) -> EmbeddingProvider:
    """Build a provider from a CLI-style name: 'hashed[:dim]' or 'minilm'."""
    if name.startswith("hashed"):
        _, _, dim = name.partition(":")
        return HashedTfEmbedder(int(dim) if dim else 256)
    if name in ("minilm", "all-MiniLM-L6-v2"):
        return SentenceTransformerEmbedder()
    raise ValueError(f"unknown embedder {name!r}")
