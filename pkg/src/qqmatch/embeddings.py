"""Word-vector table: loading, average sentence vectors, cosine.

Vectors are plain 1-D numpy arrays throughout the engine.  The table is
immutable after load and safe for concurrent reads.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractError, FormatError


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    vocab: dict[str, int]
    matrix: np.ndarray  # |vocab| x dim, float32

    def __contains__(self, token: str) -> bool:
        return token in self.vocab

    def vector(self, token: str) -> np.ndarray:
        return self.matrix[self.vocab[token]]


def load_table(path: str | Path) -> EmbeddingTable:
    """Parse the text word-vector format: header "<count> <dim>", then
    one "<token> <f1> ... <f_dim>" line per word."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header:
            raise FormatError(f"{path}:1: missing '<vocab_count> <dim>' header")
        parts = header.split(" ")
        if len(parts) != 2:
            raise FormatError(f"{path}:1: malformed header {header!r}")
        try:
            count, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(f"{path}:1: non-integer header {header!r}") from None
        if count <= 0 or dim <= 0:
            raise FormatError(f"{path}:1: header values must be positive, got {header!r}")

        vocab: dict[str, int] = {}
        matrix = np.empty((count, dim), dtype=np.float32)
        lineno = 1
        for lineno, line in enumerate(fh, 2):
            line = line.rstrip("\n")
            if not line:
                continue
            row = len(vocab)
            if row >= count:
                raise FormatError(f"{path}:{lineno}: more rows than header-declared {count}")
            fields = line.split(" ")
            token, values = fields[0], fields[1:]
            if len(values) != dim:
                raise FormatError(
                    f"{path}:{lineno}: expected {dim} values for {token!r}, got {len(values)}"
                )
            if token in vocab:
                raise FormatError(f"{path}:{lineno}: duplicate token {token!r}")
            try:
                matrix[row] = np.asarray([float(v) for v in values], dtype=np.float32)
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-numeric value in row") from None
            vocab[token] = row
        if len(vocab) != count:
            raise FormatError(
                f"{path}: header declares {count} rows but file has {len(vocab)}"
            )
    return EmbeddingTable(dim=dim, vocab=vocab, matrix=matrix)


def average_embedding(tokens, table: EmbeddingTable) -> np.ndarray:
    """Mean of in-vocabulary token vectors; zero vector when none are known."""
    rows = [table.vocab[t] for t in tokens if t in table.vocab]
    if not rows:
        return np.zeros(table.dim, dtype=np.float64)
    return table.matrix[rows].astype(np.float64).sum(axis=0) / len(rows)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """u.v / (|u||v|), defined as 0.0 when either norm is zero."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ContractError(f"dim mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def unit(v: np.ndarray) -> np.ndarray:
    """L2-normalize, leaving exact zero vectors untouched."""
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v)
    return v if n == 0.0 else v / n
