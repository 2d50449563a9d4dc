"""Deterministic tiny resources for the test-suite and demo scripts.

The fixture embedding table places every token in a concept group: a
vector is the group's one-hot direction plus a small token-specific
component confined to a separate noise subspace.  Cross-group cosines
are therefore bounded by the squared noise scale (scaled similarity
~0.5, never reaching the 0.55 semantic threshold) while same-group
cosines stay near 1, so semantic matches are decided by the group map
alone and misspellings are simply left out of the vocabulary.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .embeddings import EmbeddingTable
from .index import QuestionRecord
from .siamese import SiameseWeights
from .svm import FEATURE_ORDER_M1, FEATURE_ORDER_M5, MetaClassifier, save_model

_GROUPS: dict[str, str] = {}


def _group(name: str, tokens: str) -> None:
    for tok in tokens.split():
        _GROUPS[tok] = name


_group("money", "cost costs fee fees charge charges price prices money dollar tax taxes cash")
_group("qword", "what how why when where which who")
_group("aux", "is are was were be am do does can will would should could want need")
_group("article", "a an the")
_group("prep", "to of in on for from at by with into out up")
_group("pronoun", "i my me you we it this that there")
_group("conj", "or and")
_group("adv", "all still previous not just also only")
_group(
    "trade",
    "trading trade trades sell selling buy buying order orders share shares stock "
    "stocks market markets",
)
_group("fraction", "fractional fraction partial")
_group(
    "account",
    "account accounts retirement individual roth traditional 401k brokerage fund funds "
    "mutual plan plans balance balances minimum employer sponsored bank external",
)
_group(
    "transfer",
    "transfer transfers contribute contribution contributions deposit deposits withdraw "
    "wire routing electronic direct reinvestment dividend dividends averaging rollover "
    "rollovers link number numbers",
)
_group("legal", "power attorney beneficiary beneficiaries required distribution distributions")
_group(
    "action",
    "open opening opened check checks reset change changes enroll set take mean means "
    "meaning difference between password implications steps follow explain tell know",
)
_group("time", "hours long days day week weeks month months year years")

_NOISE_DIMS = 8
_NOISE_SCALE = 0.1


def fixture_vocab() -> list[str]:
    return sorted(_GROUPS)


def _token_noise(token: str) -> np.ndarray:
    seed = int.from_bytes(hashlib.sha256(token.encode()).digest()[:8], "little")
    rng = np.random.default_rng(seed)
    n = rng.standard_normal(_NOISE_DIMS)
    return n / np.linalg.norm(n)


def fixture_table() -> EmbeddingTable:
    group_names = sorted(set(_GROUPS.values()))
    group_axis = {g: i for i, g in enumerate(group_names)}
    dim = len(group_names) + _NOISE_DIMS
    vocab = fixture_vocab()
    matrix = np.zeros((len(vocab), dim), dtype=np.float32)
    for row, token in enumerate(vocab):
        v = np.zeros(dim)
        v[group_axis[_GROUPS[token]]] = 1.0
        v[len(group_names) :] = _NOISE_SCALE * _token_noise(token)
        matrix[row] = (v / np.linalg.norm(v)).astype(np.float32)
    return EmbeddingTable(dim=dim, vocab={t: i for i, t in enumerate(vocab)}, matrix=matrix)


def write_table(table: EmbeddingTable, path: Path) -> None:
    tokens = sorted(table.vocab, key=table.vocab.get)
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"{len(tokens)} {table.dim}\n")
        for tok in tokens:
            values = " ".join(repr(float(x)) for x in table.matrix[table.vocab[tok]])
            fh.write(f"{tok} {values}\n")


def fixture_weights(
    hidden_dim: int = 6,
    embed_dim: int = 12,
    seq_len: int = 24,
    seed: int = 7,
    vocab: list[str] | None = None,
) -> SiameseWeights:
    tokens = fixture_vocab() if vocab is None else vocab
    rng = np.random.default_rng(seed)
    V = len(tokens) + 1
    embedding = rng.normal(0.0, 0.4, size=(V, embed_dim)).astype(np.float32)
    embedding[0] = 0.0
    scale = 1.0 / np.sqrt(embed_dim + hidden_dim)
    kernel = rng.normal(0.0, scale, size=(embed_dim, 4 * hidden_dim)).astype(np.float32)
    recurrent = rng.normal(0.0, scale, size=(hidden_dim, 4 * hidden_dim)).astype(np.float32)
    bias = rng.normal(0.0, 0.1, size=(4 * hidden_dim,)).astype(np.float32)
    return SiameseWeights(
        vocab_size=V,
        embed_dim=embed_dim,
        hidden_dim=hidden_dim,
        seq_len=seq_len,
        token_index={t: i + 1 for i, t in enumerate(tokens)},
        embedding=embedding,
        kernel=kernel,
        recurrent=recurrent,
        bias=bias,
    )


_CORPUS: tuple[tuple[str, str], ...] = (
    ("q01", "What are fees or charges for fractional trading?"),
    ("q02", "How do I open an IRA?"),
    ("q03", "What is power of attorney?"),
    ("q04", "What is the routing number for EFT?"),
    ("q05", "How to transfer my Roth account?"),
    ("q06", "Can I still contribute to my previous employer sponsored plan?"),
    ("q07", "What is a mutual fund?"),
    ("q08", "How do I sell all shares in my account?"),
    ("q09", "What is fractional trading?"),
    ("q10", "How do I withdraw money from my 401k?"),
    ("q11", "What is the minimum balance for a brokerage account?"),
    ("q12", "How do I set up direct deposit?"),
    ("q13", "What are the tax implications of selling stocks?"),
    ("q14", "How do I change my beneficiary?"),
    ("q15", "What is a required minimum distribution?"),
    ("q16", "How long does a wire transfer take?"),
    ("q17", "What is dollar cost averaging?"),
    ("q18", "How do I enroll in dividend reinvestment?"),
    ("q19", "What is the difference between a Roth and traditional IRA?"),
    ("q20", "How do I check my account balance?"),
    ("q21", "What are the trading hours for the stock market?"),
    ("q22", "How do I reset my password?"),
    ("q23", "What is a money market fund?"),
    ("q24", "How do I link an external bank account?"),
    ("q25", "What does fractional share mean?"),
)


def fixture_corpus() -> list[QuestionRecord]:
    return [
        QuestionRecord(id=qid, question=text, answer=f"Canned answer for {qid}.")
        for qid, text in _CORPUS
    ]


def fixture_meta_model(mode: str = "M1") -> MetaClassifier:
    """Hand-built model, probability monotone in every feature.

    decision(x) = 0.2*(gamma*sum(x) + 1)^2 - 0.2 with gamma*sum(x) + 1 > 0
    over the reachable feature box, so the all-ones vector maximizes the
    probability (0.7685 >= 0.7) while any query with fuzzy = 0 and
    avg-cosine ~ 0 stays below 0.25 even if both LSTM cosines hit 1.
    """
    dims = 4 if mode == "M1" else 5
    gamma = 1.0 / dims
    sv = np.vstack([np.ones(dims), np.zeros(dims)])
    return MetaClassifier(
        mode=mode,
        C=0.2,
        degree=2,
        gamma=gamma,
        coef0=1.0,
        bias=0.0,
        platt_a=-8.0,
        platt_b=3.6,
        threshold=0.7,
        support_vectors=sv,
        dual_coefs=np.asarray([0.2, -0.2]),
        feature_order=FEATURE_ORDER_M1 if mode == "M1" else FEATURE_ORDER_M5,
    )


def sentence_vector(text: str, dim: int = 12) -> np.ndarray:
    """Deterministic stand-in sentence embedding: mean of hashed token vectors."""
    tokens = text.split() or [""]
    acc = np.zeros(dim)
    for tok in tokens:
        seed = int.from_bytes(hashlib.sha256(("sent:" + tok).encode()).digest()[:8], "little")
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(dim)
        acc += v / np.linalg.norm(v)
    return acc / len(tokens)


def write_sentence_cache(texts: list[str], path: Path, dim: int = 12) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        seen = set()
        for text in texts:
            if text in seen:
                continue
            seen.add(text)
            vec = sentence_vector(text, dim)
            fh.write(json.dumps({"text": text, "vector": [float(x) for x in vec]}) + "\n")


def write_fixture_tree(
    root: Path,
    provider_kind: str = "disabled",
    endpoint: str | None = None,
    cache_extra_texts: list[str] | None = None,
    sentence_dim: int = 12,
) -> Path:
    """Write a complete resource tree + engine config; returns the config path."""
    from .siamese import save_weights
    from .textnorm import NormalizationConfig, preprocess

    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    table = fixture_table()
    write_table(table, root / "table.vec")
    weights = fixture_weights()
    save_weights(weights, root / "weights.slw", root / "tokens.txt")
    corpus = fixture_corpus()
    with (root / "corpus.jsonl").open("w", encoding="utf-8") as fh:
        for rec in corpus:
            fh.write(json.dumps({"id": rec.id, "question": rec.question, "answer": rec.answer}) + "\n")
    save_model(fixture_meta_model("M1"), root / "meta_m1.json")
    save_model(fixture_meta_model("M5"), root / "meta_m5.json")

    norm = NormalizationConfig.default()
    cache_texts = [preprocess(rec.question, norm).unnormalized for rec in corpus]
    cache_texts.extend(cache_extra_texts or [])
    write_sentence_cache(cache_texts, root / "sentence_cache.jsonl", dim=sentence_dim)

    config = {
        "paths": {
            "embedding_table": "table.vec",
            "siamese_weights_unnormalized": "weights.slw",
            "token_index": "tokens.txt",
            "corpus": "corpus.jsonl",
            "index": "questions.qqix",
            "meta_model_m1": "meta_m1.json",
            "meta_model_m5": "meta_m5.json",
            "sentence_cache": "sentence_cache.jsonl",
        },
        "sentence_provider": {
            "kind": provider_kind,
            "endpoint": endpoint,
            "timeout_ms": 500,
        },
        "fuzzy": {"threshold1": 0.6, "threshold2": 0.55},
        "top_k": 5,
    }
    config_path = root / "config.json"
    config_path.write_text(json.dumps(config, indent=1), encoding="utf-8")
    return config_path
