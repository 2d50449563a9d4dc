"""End-to-end sanity pipeline: train a toy twin LSTM, export every
engine artifact, train the 5-feature meta-classifier through the engine
CLI, and evaluate on a held-out slice.

This is a smoke check of the whole train/export/serve loop, not a
benchmark reproduction: the bar is macro F1 strictly above the 0.5
chance floor.  Runs either on a local QQP-format CSV or on a bundled
synthetic paraphrase corpus.
"""

from __future__ import annotations

import csv
import json
import subprocess
from pathlib import Path

import numpy as np

from .cache import export_sentence_cache
from .siamese_train import TrainingRun, train_siamese
from .textprep import DEFAULT_CMD

_VERBS = [
    "transfer", "close", "open", "update", "verify", "cancel",
    "link", "reset", "fund", "withdraw", "review", "dispute",
]
_OBJECTS = [
    "account", "card", "password", "balance", "plan", "order",
    "deposit", "profile", "email", "address", "loan", "statement",
]
_TEMPLATES = [
    "how do i {v} my {o}",
    "can i {v} the {o}",
    "what is the best way to {v} my {o}",
    "{v} {o}",
    "i want to {v} my {o} now",
    "steps to {v} a {o}",
]


def synthetic_pairs(n_train: int = 160, n_eval: int = 80, seed: int = 0):
    """Balanced paraphrase pairs over 12 intents; returns (train, eval) lists
    of (q1, q2, label) tuples."""
    rng = np.random.default_rng(seed)
    intents = [
        [tpl.format(v=v, o=o) for tpl in _TEMPLATES]
        for v, o in zip(_VERBS, _OBJECTS)
    ]

    def draw(n):
        rows = []
        for i in range(n):
            if i % 2 == 0:
                intent = intents[rng.integers(len(intents))]
                a, b = rng.choice(len(intent), size=2, replace=False)
                rows.append((intent[a], intent[b], 1))
            else:
                ia, ib = rng.choice(len(intents), size=2, replace=False)
                qa = intents[ia][rng.integers(len(_TEMPLATES))]
                qb = intents[ib][rng.integers(len(_TEMPLATES))]
                rows.append((qa, qb, 0))
        return rows

    return draw(n_train), draw(n_eval)


def load_qqp_pairs(path: str | Path, n_train: int, n_eval: int, seed: int = 0):
    """Take a deterministic shuffled slice of a QQP-format CSV."""
    rows = []
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            if row.get("is_duplicate") not in ("0", "1"):
                continue
            q1 = (row.get("question1") or "").strip()
            q2 = (row.get("question2") or "").strip()
            if q1 and q2:
                rows.append((q1, q2, int(row["is_duplicate"])))
            if len(rows) >= (n_train + n_eval) * 3:
                break
    if len(rows) < n_train + n_eval:
        raise ValueError(f"{path}: only {len(rows)} usable pairs, need {n_train + n_eval}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(rows))
    picked = [rows[i] for i in order[: n_train + n_eval]]
    return picked[:n_train], picked[n_train:]


def _write_tsv(path: Path, rows) -> None:
    with path.open("w", encoding="utf-8") as fh:
        for q1, q2, label in rows:
            clean1 = " ".join(q1.split())
            clean2 = " ".join(q2.split())
            fh.write(f"{clean1}\t{clean2}\t{label}\n")


def _engine(args: list[str], cmd: tuple[str, ...] = DEFAULT_CMD) -> str:
    proc = subprocess.run([*cmd, *args], capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(
            f"engine {' '.join(args)} failed ({proc.returncode}): {proc.stderr.strip()}"
        )
    return proc.stdout


def run_sanity(
    workdir: str | Path,
    train_rows,
    eval_rows,
    embed_model: str = "hash:16",
    seq_len: int = 16,
    embed_dim: int = 16,
    hidden_dim: int = 8,
    epochs: int = 3,
    seed: int = 0,
    threshold: float = 0.5,
    engine_cmd: tuple[str, ...] = DEFAULT_CMD,
) -> dict:
    """Train, export, meta-train, and evaluate; returns the eval report."""
    work = Path(workdir)
    work.mkdir(parents=True, exist_ok=True)
    train_tsv = work / "train_pairs.tsv"
    eval_tsv = work / "eval_pairs.tsv"
    _write_tsv(train_tsv, train_rows)
    _write_tsv(eval_tsv, eval_rows)

    run = TrainingRun(
        base_pairs=train_tsv,
        out_unnorm=work / "siamese_unnorm.slw",
        out_norm=work / "siamese_norm.slw",
        out_token_index=work / "tokens.txt",
        out_word_table=work / "table.vec",
        epochs=epochs,
        batch_size=32,
        seed=seed,
        seq_len=seq_len,
        embed_dim=embed_dim,
        hidden_dim=hidden_dim,
        engine_cmd=engine_cmd,
    )
    summary = train_siamese(run)

    texts = [q for q1, q2, _ in (*train_rows, *eval_rows) for q in (q1, q2)]
    export_sentence_cache(texts, embed_model, work / "sentence_cache.jsonl", engine_cmd=engine_cmd)

    config = {
        "paths": {
            "embedding_table": "table.vec",
            "siamese_weights_unnormalized": "siamese_unnorm.slw",
            "siamese_weights_normalized": "siamese_norm.slw",
            "token_index": "tokens.txt",
            "meta_model_m5": "meta_m5.json",
            "sentence_cache": "sentence_cache.jsonl",
        },
        "sentence_provider": {"kind": "file_cache"},
        "classification_threshold": threshold,
    }
    config_path = work / "config.json"
    config_path.write_text(json.dumps(config, indent=1), encoding="utf-8")

    _engine(["--config", str(config_path), "train-meta", str(train_tsv), "--mode", "m5"], engine_cmd)
    out = _engine(
        [
            "--config", str(config_path), "evaluate", str(eval_tsv),
            "--mode", "m5", "--threshold", str(threshold),
        ],
        engine_cmd,
    )
    report = json.loads(out)
    report["training"] = summary
    report["workdir"] = str(work)
    return report


def main_qqp_sanity(
    workdir: Path,
    qqp_csv: Path | None,
    n_train: int,
    n_eval: int,
    embed_model: str,
    seed: int,
) -> dict:
    if qqp_csv is not None:
        train_rows, eval_rows = load_qqp_pairs(qqp_csv, n_train, n_eval, seed=seed)
    else:
        train_rows, eval_rows = synthetic_pairs(n_train, n_eval, seed=seed)
    return run_sanity(workdir, train_rows, eval_rows, embed_model=embed_model, seed=seed)
