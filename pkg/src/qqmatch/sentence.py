"""Pluggable sentence-embedding providers for the fifth feature.

Three kinds: a JSON-lines file cache keyed by exact (preprocessed,
unnormalized) text, a remote HTTP sidecar speaking POST /embed, and a
disabled stand-in that forces 4-feature mode.  Provider failures are
per-query: the caller falls back to 4-feature scoring rather than
failing the request.
"""

from __future__ import annotations

import json
from pathlib import Path

import httpx
import numpy as np

from .embeddings import cosine
from .errors import CacheMissError, FormatError, TransportError


class DisabledProvider:
    kind = "disabled"
    dim: int | None = None

    def embed(self, text: str) -> np.ndarray:
        raise CacheMissError("sentence provider is disabled")


class FileCacheProvider:
    """Exact-key lookup over a JSON-lines cache: {"text": ..., "vector": [...]}."""

    kind = "file_cache"

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._cache: dict[str, np.ndarray] = {}
        self.dim: int | None = None
        for lineno, line in enumerate(self.path.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                entry = json.loads(line)
                text = entry["text"]
                vector = np.asarray(entry["vector"], dtype=np.float64)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"{self.path}:{lineno}: bad cache line: {exc}") from None
            if vector.ndim != 1 or vector.size == 0:
                raise FormatError(f"{self.path}:{lineno}: vector must be a non-empty list")
            if self.dim is None:
                self.dim = int(vector.size)
            elif vector.size != self.dim:
                raise FormatError(
                    f"{self.path}:{lineno}: dim {vector.size} != first-line dim {self.dim}"
                )
            if text in self._cache:
                raise FormatError(f"{self.path}:{lineno}: duplicate text key {text!r}")
            self._cache[text] = vector
        if not self._cache:
            raise FormatError(f"{self.path}: empty sentence cache")

    def embed(self, text: str) -> np.ndarray:
        try:
            return self._cache[text]
        except KeyError:
            raise CacheMissError(f"no cached sentence vector for {text!r}") from None


class RemoteProvider:
    """POST /embed {"texts": [...]} -> {"vectors": [[...]], "dim": d}."""

    kind = "remote"

    def __init__(self, endpoint: str, timeout_ms: int = 500) -> None:
        self.endpoint = endpoint.rstrip("/")
        self.timeout_ms = timeout_ms
        self.dim: int | None = None

    def embed(self, text: str) -> np.ndarray:
        vectors = self.embed_batch([text])
        return vectors[0]

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        try:
            resp = httpx.post(
                f"{self.endpoint}/embed",
                json={"texts": texts},
                timeout=self.timeout_ms / 1000.0,
            )
            resp.raise_for_status()
            payload = resp.json()
        except httpx.HTTPError as exc:
            raise TransportError(f"embed sidecar at {self.endpoint}: {exc}") from None
        try:
            dim = int(payload["dim"])
            vectors = [np.asarray(v, dtype=np.float64) for v in payload["vectors"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise TransportError(f"embed sidecar returned malformed payload: {exc}") from None
        if len(vectors) != len(texts) or any(v.shape != (dim,) for v in vectors):
            raise TransportError("embed sidecar returned wrong vector count or dim")
        if self.dim is None:
            self.dim = dim
        elif dim != self.dim:
            raise TransportError(f"embed sidecar changed dim: {dim} != {self.dim}")
        return vectors


SentenceProvider = DisabledProvider | FileCacheProvider | RemoteProvider


def sentence_score(v1: np.ndarray, v2: np.ndarray) -> float:
    """Cosine between two sentence embeddings."""
    return cosine(v1, v2)
