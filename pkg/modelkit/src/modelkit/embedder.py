"""Sentence-embedding backends behind one `embed(texts)` call.

Two kinds: "hash:<dim>" is a deterministic toy embedder (mean token
pooling over hashed per-token unit vectors) for tests and offline
environments; any other name is treated as a sentence-transformers
checkpoint and loaded lazily.
"""

from __future__ import annotations

import hashlib

import numpy as np


class HashEmbedder:
    """Mean token pooling over sha256-seeded unit vectors; no model files."""

    def __init__(self, dim: int) -> None:
        if dim <= 0:
            raise ValueError(f"dim must be positive, got {dim}")
        self.dim = dim
        self.name = f"hash:{dim}"

    def _token_vector(self, token: str) -> np.ndarray:
        seed = int.from_bytes(hashlib.sha256(token.encode()).digest()[:8], "big")
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(self.dim)
        return v / np.linalg.norm(v)

    def embed(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim))
        for i, text in enumerate(texts):
            tokens = text.split()
            if not tokens:
                continue
            out[i] = np.mean([self._token_vector(t) for t in tokens], axis=0)
        return out


class SentenceTransformerEmbedder:
    def __init__(self, model_name: str) -> None:
        from sentence_transformers import SentenceTransformer

        self.name = model_name
        self._model = SentenceTransformer(model_name)
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def embed(self, texts: list[str]) -> np.ndarray:
        return np.asarray(self._model.encode(list(texts), convert_to_numpy=True))


def make_embedder(model_name: str):
    if model_name.startswith("hash:"):
        return HashEmbedder(int(model_name.split(":", 1)[1]))
    return SentenceTransformerEmbedder(model_name)
