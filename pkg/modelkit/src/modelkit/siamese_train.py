"""Twin-LSTM trainer with shared weights and a cosine output head.

Both question arms run through one embedding + one LSTM; the pair score
is the cosine of the final hidden states, pushed through contrastive
binary cross-entropy on (cos + 1) / 2.  Early stopping tracks the
validation precision of the positive class, the tuning objective the
production model was selected on.

Export notes: torch's LSTM already orders gate blocks (input, forget,
candidate, output), matching the SLW1 container, so the export is a
transpose of each kernel plus the sum of the two bias vectors.  The
container has no metadata field; the run's seed and sources go into a
sidecar .meta.json next to each weights file.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .slw import write_meta, write_slw, write_token_index, write_word_table
from .textprep import DEFAULT_CMD, preprocess_texts


@dataclass
class TrainingRun:
    base_pairs: Path
    out_unnorm: Path
    out_norm: Path
    out_token_index: Path
    domain_pairs: Path | None = None
    out_word_table: Path | None = None
    epochs: int = 5
    batch_size: int = 64
    seed: int = 0
    vocab_cap: int = 20_000
    seq_len: int = 144
    embed_dim: int = 300
    hidden_dim: int = 75
    lr: float = 1e-3
    val_fraction: float = 0.2
    patience: int = 3
    engine_cmd: tuple[str, ...] = field(default=DEFAULT_CMD)
    keep_models: bool = False  # stash trained nn.Modules in the summary (tests)


@dataclass
class PairCorpus:
    q1: list[str]
    q2: list[str]
    labels: np.ndarray


def load_pairs_tsv(path: str | Path) -> PairCorpus:
    q1, q2, labels = [], [], []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3 or parts[2] not in ("0", "1"):
            raise ValueError(f"{path}:{lineno}: expected 'q1<TAB>q2<TAB>0|1'")
        q1.append(parts[0])
        q2.append(parts[1])
        labels.append(int(parts[2]))
    if not labels:
        raise ValueError(f"{path}: empty pair corpus")
    return PairCorpus(q1=q1, q2=q2, labels=np.asarray(labels))


class Tokenizer:
    """Frequency-capped vocabulary; unknown tokens are dropped, index 0 pads."""

    def __init__(self, token_lists: list[list[str]], cap: int) -> None:
        counts = Counter(tok for tokens in token_lists for tok in tokens)
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:cap]
        self.tokens = [tok for tok, _ in ranked]
        self.index = {tok: i + 1 for i, tok in enumerate(self.tokens)}

    @property
    def vocab_size(self) -> int:
        return len(self.tokens) + 1

    def vectorize(self, tokens: list[str], seq_len: int) -> np.ndarray:
        idx = [self.index[t] for t in tokens if t in self.index][-seq_len:]
        out = np.zeros(seq_len, dtype=np.int64)
        if idx:
            out[seq_len - len(idx) :] = idx
        return out


class TwinLSTM(nn.Module):
    def __init__(self, vocab_size: int, embed_dim: int, hidden_dim: int) -> None:
        super().__init__()
        self.embedding = nn.Embedding(vocab_size, embed_dim, padding_idx=0)
        self.lstm = nn.LSTM(embed_dim, hidden_dim, batch_first=True)
        with torch.no_grad():
            self.embedding.weight[0].zero_()

    def encode(self, idx: torch.Tensor) -> torch.Tensor:
        out, _ = self.lstm(self.embedding(idx))
        return out[:, -1, :]

    def forward(self, idx1: torch.Tensor, idx2: torch.Tensor) -> torch.Tensor:
        h1 = self.encode(idx1)
        h2 = self.encode(idx2)
        return torch.nn.functional.cosine_similarity(h1, h2, dim=1, eps=1e-8)


def _positive_precision(pred: np.ndarray, labels: np.ndarray) -> float:
    tp = int(np.sum((pred == 1) & (labels == 1)))
    fp = int(np.sum((pred == 1) & (labels == 0)))
    return tp / (tp + fp) if tp + fp else 0.0


def _train_phase(
    model: TwinLSTM,
    x1: torch.Tensor,
    x2: torch.Tensor,
    labels: torch.Tensor,
    run: TrainingRun,
    rng: np.random.Generator,
) -> None:
    n = len(labels)
    n_val = max(1, int(math.floor(run.val_fraction * n))) if n > 4 else 0
    perm = rng.permutation(n)
    val_idx = torch.as_tensor(perm[:n_val])
    train_idx = torch.as_tensor(perm[n_val:])
    optimizer = torch.optim.Adam(model.parameters(), lr=run.lr)
    bce = nn.BCELoss()

    best_precision = -1.0
    best_state = None
    stale = 0
    for _ in range(run.epochs):
        model.train()
        order = torch.as_tensor(rng.permutation(len(train_idx)))
        for start in range(0, len(train_idx), run.batch_size):
            batch = train_idx[order[start : start + run.batch_size]]
            optimizer.zero_grad()
            cos = model(x1[batch], x2[batch])
            prob = torch.clamp((cos + 1.0) / 2.0, 1e-6, 1.0 - 1e-6)
            loss = bce(prob, labels[batch])
            loss.backward()
            optimizer.step()
            with torch.no_grad():
                model.embedding.weight[0].zero_()
        if n_val == 0:
            continue
        model.eval()
        with torch.no_grad():
            cos = model(x1[val_idx], x2[val_idx])
            pred = ((cos + 1.0) / 2.0 >= 0.5).long().numpy()
        precision = _positive_precision(pred, labels[val_idx].long().numpy())
        if precision > best_precision:
            best_precision = precision
            best_state = {k: v.clone() for k, v in model.state_dict().items()}
            stale = 0
        else:
            stale += 1
            if stale >= run.patience:
                break
    if best_state is not None:
        model.load_state_dict(best_state)


def _export(model: TwinLSTM, tokens: list[str], seq_len: int, path: Path, meta: dict) -> None:
    embedding = model.embedding.weight.detach().numpy().astype(np.float32)
    kernel = model.lstm.weight_ih_l0.detach().numpy().T.astype(np.float32)
    recurrent = model.lstm.weight_hh_l0.detach().numpy().T.astype(np.float32)
    bias = (model.lstm.bias_ih_l0 + model.lstm.bias_hh_l0).detach().numpy().astype(np.float32)
    write_slw(path, embedding, kernel, recurrent, bias, seq_len)
    write_meta(Path(str(path) + ".meta.json"), meta)


def train_siamese(run: TrainingRun) -> dict:
    """Train both text variants and export SLW1 weights + token index.

    Returns a summary dict (vocab size, dims, per-variant file paths).
    """
    torch.manual_seed(run.seed)
    torch.set_num_threads(1)

    base = load_pairs_tsv(run.base_pairs)
    phases = [base]
    if run.domain_pairs is not None:
        phases.append(load_pairs_tsv(run.domain_pairs))

    all_texts = sorted({t for corpus in phases for t in (*corpus.q1, *corpus.q2)})
    pre = {row["raw"]: row for row in preprocess_texts(all_texts, cmd=run.engine_cmd)}

    token_lists = [pre[t]["unnorm_tokens"] for t in all_texts] + [
        pre[t]["norm_tokens"] for t in all_texts
    ]
    tokenizer = Tokenizer(token_lists, cap=run.vocab_cap - 1)

    summary = {
        "vocab_size": tokenizer.vocab_size,
        "seq_len": run.seq_len,
        "embed_dim": run.embed_dim,
        "hidden_dim": run.hidden_dim,
        "seed": run.seed,
        "variants": {},
    }
    write_token_index(run.out_token_index, tokenizer.tokens)

    for variant, key, out_path, seed_offset in (
        ("unnormalized", "unnorm_tokens", run.out_unnorm, 0),
        ("normalized", "norm_tokens", run.out_norm, 1),
    ):
        torch.manual_seed(run.seed + seed_offset)
        rng = np.random.default_rng(run.seed + seed_offset)
        model = TwinLSTM(tokenizer.vocab_size, run.embed_dim, run.hidden_dim)
        for corpus in phases:
            x1 = torch.as_tensor(
                np.stack([tokenizer.vectorize(pre[t][key], run.seq_len) for t in corpus.q1])
            )
            x2 = torch.as_tensor(
                np.stack([tokenizer.vectorize(pre[t][key], run.seq_len) for t in corpus.q2])
            )
            labels = torch.as_tensor(corpus.labels, dtype=torch.float32)
            _train_phase(model, x1, x2, labels, run, rng)
        meta = {
            "variant": variant,
            "seed": run.seed,
            "seed_offset": seed_offset,
            "epochs": run.epochs,
            "batch_size": run.batch_size,
            "base_pairs": str(run.base_pairs),
            "domain_pairs": None if run.domain_pairs is None else str(run.domain_pairs),
            "vocab_size": tokenizer.vocab_size,
            "seq_len": run.seq_len,
            "embed_dim": run.embed_dim,
            "hidden_dim": run.hidden_dim,
            "token_index": str(run.out_token_index),
        }
        _export(model, tokenizer.tokens, run.seq_len, Path(out_path), meta)
        summary["variants"][variant] = str(out_path)
        if run.keep_models:
            summary.setdefault("models", {})[variant] = model
        if variant == "unnormalized" and run.out_word_table is not None:
            # the average-embedding score draws word vectors from the
            # trained embedding matrix; pad row 0 is not a word
            embedding = model.embedding.weight.detach().numpy()
            write_word_table(run.out_word_table, tokenizer.tokens, embedding[1:])
            summary["word_table"] = str(run.out_word_table)
    return summary
