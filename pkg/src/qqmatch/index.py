"""Precomputed per-question index and the query-time scoring paths.

Each corpus question is preprocessed once and stored with its two LSTM
representations, its average word vector, optionally its sentence
embedding, and its fuzzy token set.  Dense vectors are L2-normalized at
build time so a whole feature column is one matrix-vector product at
query time; the fuzzy ratio has no vector form and runs per candidate.

The on-disk container ("QQIX", little-endian) carries a version, the
feature mode, the vector dims, and length-prefixed UTF-8 strings with
float32 payloads, and round-trips bit-exactly.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO

import numpy as np

from . import siamese
from .embeddings import EmbeddingTable, average_embedding, cosine, unit
from .errors import BuildError, CacheMissError, ConfigError, FormatError, TransportError
from .fuzzy import FuzzyConfig, fuzzy_intersection_ratio
from .sentence import DisabledProvider, SentenceProvider, sentence_score
from .siamese import SiameseWeights
from .svm import MetaClassifier
from .textnorm import NormalizationConfig, preprocess

MAGIC = b"QQIX"
VERSION = 1


@dataclass(frozen=True)
class QuestionRecord:
    id: str
    question: str
    answer: str


@dataclass(frozen=True)
class IndexedQuestion:
    record: QuestionRecord
    unnorm_rep: np.ndarray
    norm_rep: np.ndarray
    avg_vec: np.ndarray
    sent_vec: np.ndarray | None
    fuzzy_tokens: frozenset[str]


@dataclass
class QuestionIndex:
    mode: str                      # "M1" | "M5"
    hidden_dim: int
    avg_dim: int
    sent_dim: int                  # 0 in M1 mode
    records: list[QuestionRecord]
    unnorm: np.ndarray             # (N, hidden_dim) float32
    norm: np.ndarray               # (N, hidden_dim) float32
    avg: np.ndarray                # (N, avg_dim) float32
    sent: np.ndarray | None        # (N, sent_dim) float32 or None
    fuzzy_tokens: tuple[frozenset[str], ...]

    def __len__(self) -> int:
        return len(self.records)

    def entry(self, i: int) -> IndexedQuestion:
        return IndexedQuestion(
            record=self.records[i],
            unnorm_rep=self.unnorm[i],
            norm_rep=self.norm[i],
            avg_vec=self.avg[i],
            sent_vec=None if self.sent is None else self.sent[i],
            fuzzy_tokens=self.fuzzy_tokens[i],
        )


@dataclass
class Resources:
    norm_config: NormalizationConfig
    table: EmbeddingTable
    weights_unnorm: SiameseWeights
    weights_norm: SiameseWeights
    provider: SentenceProvider = field(default_factory=DisabledProvider)
    fuzzy_config: FuzzyConfig = field(default_factory=FuzzyConfig)
    meta_m1: MetaClassifier | None = None
    meta_m5: MetaClassifier | None = None
    use_cosine: bool = True
    prefilter_top_n: int | None = None


@dataclass
class MatchResult:
    record: QuestionRecord
    features: np.ndarray
    probability: float
    rank: int


@dataclass
class MatchResponse:
    matches: list[MatchResult]
    answered: bool
    degraded: bool = False


def load_corpus(path: str | Path) -> list[QuestionRecord]:
    path = Path(path)
    records: list[QuestionRecord] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            rec = QuestionRecord(id=str(obj["id"]), question=obj["question"], answer=obj["answer"])
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise FormatError(f"{path}:{lineno}: bad corpus line: {exc}") from None
        if not rec.question:
            raise FormatError(f"{path}:{lineno}: empty question for id {rec.id!r}")
        records.append(rec)
    return records


def _siamese_rep(tokens, weights: SiameseWeights) -> np.ndarray:
    return siamese.encode(siamese.vectorize(tokens, weights), weights)


def build_index(corpus: list[QuestionRecord], resources: Resources) -> QuestionIndex:
    if not corpus:
        raise BuildError("corpus is empty")
    counts: dict[str, int] = {}
    for r in corpus:
        counts[r.id] = counts.get(r.id, 0) + 1
    dupes = sorted(k for k, v in counts.items() if v > 1)
    if dupes:
        raise BuildError(f"duplicate question ids: {dupes}")

    with_sentence = resources.provider.kind != "disabled"
    sia_norm = resources.use_cosine  # raw-dot mode stores unscaled reps
    unnorm_rows, norm_rows, avg_rows, sent_rows = [], [], [], []
    fuzzy_sets: list[frozenset[str]] = []
    for rec in corpus:
        pre = preprocess(rec.question, resources.norm_config)
        u = _siamese_rep(pre.unnorm_tokens, resources.weights_unnorm)
        n = _siamese_rep(pre.norm_tokens, resources.weights_norm)
        unnorm_rows.append(unit(u) if sia_norm else u)
        norm_rows.append(unit(n) if sia_norm else n)
        avg_rows.append(unit(average_embedding(pre.unnorm_tokens, resources.table)))
        fuzzy_sets.append(pre.fuzzy_token_set)
        if with_sentence:
            try:
                sent_rows.append(unit(resources.provider.embed(pre.unnormalized)))
            except (CacheMissError, TransportError) as exc:
                raise BuildError(
                    f"question {rec.id!r}: sentence provider failed at build time: {exc}"
                ) from None

    hidden_dim = resources.weights_unnorm.hidden_dim
    sent_mat = np.asarray(sent_rows, dtype=np.float32) if with_sentence else None
    return QuestionIndex(
        mode="M5" if with_sentence else "M1",
        hidden_dim=hidden_dim,
        avg_dim=resources.table.dim,
        sent_dim=int(sent_mat.shape[1]) if sent_mat is not None else 0,
        records=list(corpus),
        unnorm=np.asarray(unnorm_rows, dtype=np.float32),
        norm=np.asarray(norm_rows, dtype=np.float32),
        avg=np.asarray(avg_rows, dtype=np.float32),
        sent=sent_mat,
        fuzzy_tokens=tuple(fuzzy_sets),
    )


def _write_str(fh: BinaryIO, s: str) -> None:
    raw = s.encode("utf-8")
    fh.write(struct.pack("<I", len(raw)))
    fh.write(raw)


class _Reader:
    def __init__(self, blob: bytes, path: Path) -> None:
        self.blob = blob
        self.off = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.off + n > len(self.blob):
            raise FormatError(f"{self.path}: truncated index file at byte {self.off}")
        out = self.blob[self.off : self.off + n]
        self.off += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def string(self) -> str:
        return self.take(self.u32()).decode("utf-8")

    def f32s(self, n: int) -> np.ndarray:
        return np.frombuffer(self.take(4 * n), dtype="<f4").copy()


def save_index(index: QuestionIndex, path: str | Path) -> None:
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(
            struct.pack(
                "<IIIIII",
                VERSION,
                4 if index.mode == "M1" else 5,
                index.hidden_dim,
                index.avg_dim,
                index.sent_dim,
                len(index.records),
            )
        )
        for i, rec in enumerate(index.records):
            _write_str(fh, rec.id)
            _write_str(fh, rec.question)
            _write_str(fh, rec.answer)
            fh.write(np.ascontiguousarray(index.unnorm[i], dtype="<f4").tobytes())
            fh.write(np.ascontiguousarray(index.norm[i], dtype="<f4").tobytes())
            fh.write(np.ascontiguousarray(index.avg[i], dtype="<f4").tobytes())
            if index.sent is not None:
                fh.write(np.ascontiguousarray(index.sent[i], dtype="<f4").tobytes())
            tokens = sorted(index.fuzzy_tokens[i])
            fh.write(struct.pack("<I", len(tokens)))
            for tok in tokens:
                _write_str(fh, tok)


def load_index(path: str | Path) -> QuestionIndex:
    path = Path(path)
    blob = path.read_bytes()
    r = _Reader(blob, path)
    magic = r.take(4)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    version = r.u32()
    if version != VERSION:
        raise FormatError(f"{path}: unsupported index version {version}")
    mode_flag = r.u32()
    if mode_flag not in (4, 5):
        raise FormatError(f"{path}: bad mode flag {mode_flag}")
    hidden_dim = r.u32()
    avg_dim = r.u32()
    sent_dim = r.u32()
    count = r.u32()
    if count == 0:
        raise FormatError(f"{path}: empty index")
    if (mode_flag == 5) != (sent_dim > 0):
        raise FormatError(f"{path}: mode flag {mode_flag} inconsistent with sent dim {sent_dim}")

    records: list[QuestionRecord] = []
    unnorm = np.empty((count, hidden_dim), dtype=np.float32)
    norm = np.empty((count, hidden_dim), dtype=np.float32)
    avg = np.empty((count, avg_dim), dtype=np.float32)
    sent = np.empty((count, sent_dim), dtype=np.float32) if mode_flag == 5 else None
    fuzzy_sets: list[frozenset[str]] = []
    for i in range(count):
        rec = QuestionRecord(id=r.string(), question=r.string(), answer=r.string())
        records.append(rec)
        unnorm[i] = r.f32s(hidden_dim)
        norm[i] = r.f32s(hidden_dim)
        avg[i] = r.f32s(avg_dim)
        if sent is not None:
            sent[i] = r.f32s(sent_dim)
        fuzzy_sets.append(frozenset(r.string() for _ in range(r.u32())))
    if r.off != len(blob):
        raise FormatError(f"{path}: {len(blob) - r.off} trailing bytes after payload")
    return QuestionIndex(
        mode="M1" if mode_flag == 4 else "M5",
        hidden_dim=hidden_dim,
        avg_dim=avg_dim,
        sent_dim=sent_dim,
        records=records,
        unnorm=unnorm,
        norm=norm,
        avg=avg,
        sent=sent,
        fuzzy_tokens=tuple(fuzzy_sets),
    )


def score_pair(q1_text: str, q2_text: str, resources: Resources) -> np.ndarray:
    """Feature vector [unnorm, norm, avg, fuzzy(, sentence)] for one pair.

    The sentence slot is present only when the provider is enabled and
    served both texts; a per-query provider failure degrades to the
    4-feature form.
    """
    p1 = preprocess(q1_text, resources.norm_config)
    p2 = preprocess(q2_text, resources.norm_config)
    u1 = _siamese_rep(p1.unnorm_tokens, resources.weights_unnorm)
    u2 = _siamese_rep(p2.unnorm_tokens, resources.weights_unnorm)
    n1 = _siamese_rep(p1.norm_tokens, resources.weights_norm)
    n2 = _siamese_rep(p2.norm_tokens, resources.weights_norm)
    features = [
        siamese.pair_score(u1, u2, use_cosine=resources.use_cosine),
        siamese.pair_score(n1, n2, use_cosine=resources.use_cosine),
        cosine(
            average_embedding(p1.unnorm_tokens, resources.table),
            average_embedding(p2.unnorm_tokens, resources.table),
        ),
        fuzzy_intersection_ratio(
            p1.fuzzy_token_set, p2.fuzzy_token_set, resources.fuzzy_config, resources.table
        ).score,
    ]
    if resources.provider.kind != "disabled":
        try:
            v1 = resources.provider.embed(p1.unnormalized)
            v2 = resources.provider.embed(p2.unnormalized)
            features.append(sentence_score(v1, v2))
        except (CacheMissError, TransportError):
            pass
    return np.asarray(features, dtype=np.float64)


def _check_setup(index: QuestionIndex, resources: Resources) -> None:
    w = resources.weights_unnorm
    if index.hidden_dim != w.hidden_dim or index.hidden_dim != resources.weights_norm.hidden_dim:
        raise ConfigError(
            f"index hidden dim {index.hidden_dim} != loaded weights dim "
            f"{w.hidden_dim}/{resources.weights_norm.hidden_dim}"
        )
    if index.avg_dim != resources.table.dim:
        raise ConfigError(f"index avg dim {index.avg_dim} != embedding table dim {resources.table.dim}")
    if index.mode == "M5":
        if resources.meta_m5 is None and resources.meta_m1 is None:
            raise ConfigError("no meta model loaded")
        provider_dim = getattr(resources.provider, "dim", None)
        if provider_dim is not None and provider_dim != index.sent_dim:
            raise ConfigError(f"provider dim {provider_dim} != index sentence dim {index.sent_dim}")
    elif resources.meta_m1 is None:
        raise ConfigError("index is M1-only but no M1 meta model is loaded")


def match_query(
    query_text: str,
    index: QuestionIndex,
    resources: Resources,
    top_k: int = 5,
) -> MatchResponse:
    if top_k < 1:
        raise ConfigError(f"top_k must be >= 1, got {top_k}")
    _check_setup(index, resources)
    pre = preprocess(query_text, resources.norm_config)
    if not pre.unnorm_tokens:
        return MatchResponse(matches=[], answered=False)

    degraded = False
    sent_q: np.ndarray | None = None
    use_m5 = (
        index.mode == "M5"
        and resources.provider.kind != "disabled"
        and resources.meta_m5 is not None
    )
    if use_m5:
        try:
            sent_q = unit(resources.provider.embed(pre.unnormalized))
        except (CacheMissError, TransportError):
            degraded = True
            use_m5 = False
    model = resources.meta_m5 if use_m5 else resources.meta_m1
    if model is None:
        raise ConfigError("required meta model not loaded for this query mode")

    sia_norm = resources.use_cosine
    q_u = _siamese_rep(pre.unnorm_tokens, resources.weights_unnorm)
    q_n = _siamese_rep(pre.norm_tokens, resources.weights_norm)
    q_u = unit(q_u) if sia_norm else q_u
    q_n = unit(q_n) if sia_norm else q_n
    q_a = unit(average_embedding(pre.unnorm_tokens, resources.table))

    candidates = np.arange(len(index))
    if resources.prefilter_top_n is not None and resources.prefilter_top_n < len(index):
        avg_scores = index.avg.astype(np.float64) @ q_a
        order = np.lexsort((candidates, -avg_scores))
        candidates = np.sort(order[: resources.prefilter_top_n])

    u_scores = index.unnorm[candidates].astype(np.float64) @ q_u
    n_scores = index.norm[candidates].astype(np.float64) @ q_n
    a_scores = index.avg[candidates].astype(np.float64) @ q_a
    cols = [u_scores, n_scores, a_scores]
    fuzzy_scores = np.asarray(
        [
            fuzzy_intersection_ratio(
                pre.fuzzy_token_set,
                index.fuzzy_tokens[i],
                resources.fuzzy_config,
                resources.table,
            ).score
            for i in candidates
        ]
    )
    cols.append(fuzzy_scores)
    if use_m5:
        assert index.sent is not None and sent_q is not None
        cols.append(index.sent[candidates].astype(np.float64) @ sent_q)
    feature_mat = np.column_stack(cols)
    probs = np.atleast_1d(model.predict_proba(feature_mat))

    order = sorted(
        range(len(candidates)),
        key=lambda i: (-probs[i], index.records[candidates[i]].id),
    )
    top = order[: min(top_k, len(order))]
    matches = [
        MatchResult(
            record=index.records[candidates[i]],
            features=feature_mat[i],
            probability=float(probs[i]),
            rank=rank,
        )
        for rank, i in enumerate(top, 1)
    ]
    answered = bool(matches) and matches[0].probability >= model.threshold
    return MatchResponse(matches=matches, answered=answered, degraded=degraded)
