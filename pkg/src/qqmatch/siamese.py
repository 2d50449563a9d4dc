"""Single-arm forward pass of the trained twin LSTM.

Weights live in the "SLW1" binary container (little-endian): 4-byte
magic, four u32 dims (V, d_e, d_h, L), then float32 payloads in order
embedding (V x d_e), input kernel (d_e x 4*d_h), recurrent kernel
(d_h x 4*d_h), bias (4*d_h).  Gate blocks are ordered input, forget,
candidate, output.  The token index is a companion text file, one token
per line; line number + 1 is the index (0 is the padding row).

Inference upcasts to float64; the recurrence is the standard LSTM with
zero initial hidden/cell state, returning the final hidden state.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embeddings import cosine
from .errors import ContractError, FormatError

MAGIC = b"SLW1"
_HEADER = struct.Struct("<4sIIII")


@dataclass(frozen=True)
class SlwHeader:
    vocab_size: int
    embed_dim: int
    hidden_dim: int
    seq_len: int

    @property
    def embedding_params(self) -> int:
        return self.vocab_size * self.embed_dim

    @property
    def payload_floats(self) -> int:
        v, de, dh = self.vocab_size, self.embed_dim, self.hidden_dim
        return v * de + de * 4 * dh + dh * 4 * dh + 4 * dh


@dataclass(frozen=True)
class SiameseWeights:
    vocab_size: int
    embed_dim: int
    hidden_dim: int
    seq_len: int
    token_index: dict[str, int]
    embedding: np.ndarray   # (V, d_e) float32, row 0 all-zero padding
    kernel: np.ndarray      # (d_e, 4*d_h) float32
    recurrent: np.ndarray   # (d_h, 4*d_h) float32
    bias: np.ndarray        # (4*d_h,) float32

    def __post_init__(self) -> None:
        v, de, dh = self.vocab_size, self.embed_dim, self.hidden_dim
        if self.embedding.shape != (v, de):
            raise FormatError(f"embedding shape {self.embedding.shape} != ({v}, {de})")
        if self.kernel.shape != (de, 4 * dh):
            raise FormatError(f"kernel shape {self.kernel.shape} != ({de}, {4 * dh})")
        if self.recurrent.shape != (dh, 4 * dh):
            raise FormatError(f"recurrent shape {self.recurrent.shape} != ({dh}, {4 * dh})")
        if self.bias.shape != (4 * dh,):
            raise FormatError(f"bias shape {self.bias.shape} != ({4 * dh},)")
        if v > 0 and np.any(self.embedding[0] != 0.0):
            raise FormatError("embedding row 0 (padding) must be all-zero")
        indices = list(self.token_index.values())
        if len(set(indices)) != len(indices):
            raise FormatError("token_index values must be unique")
        if indices and (min(indices) < 1 or max(indices) >= v):
            raise FormatError("token_index values must lie in [1, vocab_size - 1]")


def read_header(path: str | Path) -> SlwHeader:
    """Validate magic and read dims without touching the payload."""
    path = Path(path)
    with path.open("rb") as fh:
        raw = fh.read(_HEADER.size)
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, v, de, dh, ln = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if min(v, de, dh, ln) <= 0:
        raise FormatError(f"{path}: header dims must be positive, got {(v, de, dh, ln)}")
    return SlwHeader(vocab_size=v, embed_dim=de, hidden_dim=dh, seq_len=ln)


def load_token_index(path: str | Path) -> dict[str, int]:
    index: dict[str, int] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        token = line.strip()
        if not token:
            raise FormatError(f"{path}:{lineno}: empty token line")
        if token in index:
            raise FormatError(f"{path}:{lineno}: duplicate token {token!r}")
        index[token] = lineno  # first line gets index 1; 0 is the padding index
    return index


def load_weights(path: str | Path, token_index_path: str | Path) -> SiameseWeights:
    path = Path(path)
    header = read_header(path)
    blob = path.read_bytes()[_HEADER.size :]
    expected = header.payload_floats * 4
    if len(blob) < expected:
        raise FormatError(
            f"{path}: truncated payload, expected {expected} bytes, got {len(blob)}"
        )
    if len(blob) > expected:
        raise FormatError(
            f"{path}: trailing bytes after payload ({len(blob) - expected} extra)"
        )
    flat = np.frombuffer(blob, dtype="<f4")
    v, de, dh = header.vocab_size, header.embed_dim, header.hidden_dim
    off = 0

    def take(n: int, shape: tuple[int, ...]) -> np.ndarray:
        nonlocal off
        arr = flat[off : off + n].reshape(shape)
        off += n
        return arr

    embedding = take(v * de, (v, de))
    kernel = take(de * 4 * dh, (de, 4 * dh))
    recurrent = take(dh * 4 * dh, (dh, 4 * dh))
    bias = take(4 * dh, (4 * dh,))

    token_index = load_token_index(token_index_path)
    if token_index and max(token_index.values()) >= v:
        raise FormatError(
            f"{token_index_path}: {len(token_index)} tokens exceed vocab_size {v}"
        )
    return SiameseWeights(
        vocab_size=v,
        embed_dim=de,
        hidden_dim=dh,
        seq_len=header.seq_len,
        token_index=token_index,
        embedding=embedding,
        kernel=kernel,
        recurrent=recurrent,
        bias=bias,
    )


def save_weights(weights: SiameseWeights, path: str | Path, token_index_path: str | Path) -> None:
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(
            _HEADER.pack(
                MAGIC,
                weights.vocab_size,
                weights.embed_dim,
                weights.hidden_dim,
                weights.seq_len,
            )
        )
        for arr in (weights.embedding, weights.kernel, weights.recurrent, weights.bias):
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    tokens = sorted(weights.token_index, key=weights.token_index.get)
    Path(token_index_path).write_text("\n".join(tokens) + "\n", encoding="utf-8")


def vectorize(tokens, weights: SiameseWeights) -> np.ndarray:
    """Map tokens to indices, drop unknowns, keep the last L, left-pad with 0."""
    idx = [weights.token_index[t] for t in tokens if t in weights.token_index]
    L = weights.seq_len
    idx = idx[-L:]
    out = np.zeros(L, dtype=np.int64)
    if idx:
        out[L - len(idx) :] = idx
    return out


def encode(index_sequence: np.ndarray, weights: SiameseWeights) -> np.ndarray:
    """LSTM recurrence over the embedded sequence; returns h_L (float64)."""
    seq = np.asarray(index_sequence)
    if seq.shape != (weights.seq_len,):
        raise ContractError(
            f"sequence length {seq.shape} != ({weights.seq_len},); run vectorize first"
        )
    dh = weights.hidden_dim
    emb = weights.embedding.astype(np.float64)
    W = weights.kernel.astype(np.float64)
    R = weights.recurrent.astype(np.float64)
    b = weights.bias.astype(np.float64)

    # precompute all input projections in one matmul
    xw = emb[seq] @ W + b
    h = np.zeros(dh)
    c = np.zeros(dh)
    for t in range(weights.seq_len):
        z = xw[t] + h @ R
        i = _sigmoid(z[:dh])
        f = _sigmoid(z[dh : 2 * dh])
        g = np.tanh(z[2 * dh : 3 * dh])
        o = _sigmoid(z[3 * dh :])
        c = f * c + i * g
        h = o * np.tanh(c)
    return h


def pair_score(rep1: np.ndarray, rep2: np.ndarray, use_cosine: bool = True) -> float:
    """Cosine (default) or raw dot of two sentence representations."""
    if use_cosine:
        return cosine(rep1, rep2)
    r1 = np.asarray(rep1, dtype=np.float64)
    r2 = np.asarray(rep2, dtype=np.float64)
    if r1.shape != r2.shape:
        raise ContractError(f"dim mismatch: {r1.shape} vs {r2.shape}")
    return float(np.dot(r1, r2))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out
