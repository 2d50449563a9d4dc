"""Writers for the engine's on-disk artifacts.

SLW1 container (little-endian): magic "SLW1", four u32 dims
(V, d_e, d_h, L), float32 payloads: embedding (V x d_e, row-major),
input kernel (d_e x 4*d_h), recurrent kernel (d_h x 4*d_h), bias
(4*d_h).  Gate blocks ordered input, forget, candidate, output.  The
token index is a companion text file: one token per line, first line
is index 1 (0 is padding).

The word-vector table text format: header "<count> <dim>" then one
"<token> <f1> ... <f_dim>" line per word.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"SLW1"


def write_slw(
    path: str | Path,
    embedding: np.ndarray,
    kernel: np.ndarray,
    recurrent: np.ndarray,
    bias: np.ndarray,
    seq_len: int,
) -> None:
    v, d_e = embedding.shape
    d_h = recurrent.shape[0]
    if kernel.shape != (d_e, 4 * d_h) or recurrent.shape != (d_h, 4 * d_h) or bias.shape != (4 * d_h,):
        raise ValueError(
            f"inconsistent shapes: emb {embedding.shape}, W {kernel.shape}, "
            f"R {recurrent.shape}, b {bias.shape}"
        )
    if np.any(embedding[0] != 0.0):
        raise ValueError("embedding row 0 must be the all-zero padding row")
    with Path(path).open("wb") as fh:
        fh.write(struct.pack("<4sIIII", MAGIC, v, d_e, d_h, seq_len))
        for arr in (embedding, kernel, recurrent, bias):
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def write_token_index(path: str | Path, tokens: list[str]) -> None:
    Path(path).write_text("\n".join(tokens) + "\n", encoding="utf-8")


def write_meta(path: str | Path, meta: dict) -> None:
    Path(path).write_text(json.dumps(meta, indent=1, sort_keys=True), encoding="utf-8")


def write_word_table(path: str | Path, tokens: list[str], matrix: np.ndarray) -> None:
    """Word-vector text table from an embedding matrix (row i = tokens[i])."""
    if len(tokens) != matrix.shape[0]:
        raise ValueError(f"{len(tokens)} tokens vs {matrix.shape[0]} rows")
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"{len(tokens)} {matrix.shape[1]}\n")
        for tok, row in zip(tokens, matrix):
            fh.write(tok + " " + " ".join(repr(float(x)) for x in row) + "\n")
