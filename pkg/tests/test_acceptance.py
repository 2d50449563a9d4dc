"""Acceptance gate: one test per criterion, one PASS line each.

Run with `pytest -s tests/test_acceptance.py` to see the per-criterion
lines; any assertion failure is reported by pytest as usual.
"""

import struct
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from oracles import alg1_reference, lstm_reference
from qqmatch.cli import main
from qqmatch.config import load_config
from qqmatch.embeddings import EmbeddingTable
from qqmatch.evaluation import EvalReport
from qqmatch.fuzzy import FuzzyConfig, fuzzy_intersection_ratio
from qqmatch.index import load_index, save_index
from qqmatch.service import create_app
from qqmatch.siamese import (
    SiameseWeights,
    encode,
    load_weights,
    read_header,
    save_weights,
)
from qqmatch.svm import load_model, save_model, train
from qqmatch.testing import fixture_corpus, fixture_table, fixture_weights
from qqmatch.textnorm import preprocess
from test_svm import kkt_violations, synthetic_separable


def _report(name: str) -> None:
    print(f"ACCEPTANCE PASS: {name}")


def _random_unit_table(tokens, dim, rng):
    matrix = rng.normal(size=(len(tokens), dim))
    matrix /= np.linalg.norm(matrix, axis=1, keepdims=True)
    return EmbeddingTable(
        dim=dim, vocab={t: i for i, t in enumerate(tokens)}, matrix=matrix.astype(np.float32)
    )


def test_alg1_oracle_equivalence():
    """Independent line-by-line fuzzy reference agrees on 500 random pairs."""
    rng = np.random.default_rng(2024)
    vocab = [f"word{i:02d}" for i in range(50)]
    table = _random_unit_table(vocab, dim=8, rng=rng)
    vectors = {t: table.matrix[i].tolist() for t, i in table.vocab.items()}
    cfg = FuzzyConfig()
    started = time.perf_counter()
    worst = 0.0
    for _ in range(500):
        s1 = set(rng.choice(vocab, size=rng.integers(0, 9), replace=False))
        s2 = set(rng.choice(vocab, size=rng.integers(0, 9), replace=False))
        got = fuzzy_intersection_ratio(s1, s2, cfg, table).score
        want = alg1_reference(s1, s2, cfg.threshold1, cfg.threshold2, vectors)
        worst = max(worst, abs(got - want))
    elapsed = time.perf_counter() - started
    assert worst <= 1e-9, f"max abs diff {worst}"
    assert elapsed < 5.0, f"runtime {elapsed:.2f}s"
    _report(f"Algorithm-1 oracle equivalence (500 pairs, max diff {worst:.2e}, {elapsed:.2f}s)")


def test_fuzzy_gate_and_bounds():
    """score in [0,1]; ==0 iff no exact overlap; ==1 iff equal sets."""
    rng = np.random.default_rng(7)
    vocab = [f"word{i:02d}" for i in range(50)]
    table = _random_unit_table(vocab, dim=8, rng=rng)
    cfg = FuzzyConfig()
    for case in range(10_000):
        s1 = set(rng.choice(vocab, size=rng.integers(0, 7), replace=False))
        if case % 5 == 0:
            s2 = set(s1)  # exercise the equality branch
        else:
            s2 = set(rng.choice(vocab, size=rng.integers(0, 7), replace=False))
        score = fuzzy_intersection_ratio(s1, s2, cfg, table).score
        assert 0.0 <= score <= 1.0
        assert (score == 0.0) == (len(s1 & s2) == 0)
        assert (score == 1.0) == (bool(s1) and s1 == s2)
    _report("fuzzy gate + bounds (10,000 random cases)")


def test_lstm_oracle_and_header_arithmetic(tmp_path):
    """encode matches a per-timestep reference; layer-table arithmetic holds."""
    rng = np.random.default_rng(99)
    worst = 0.0
    draws = 0
    for dh in (1, 2, 3):
        for _ in range(40):
            v, de, ln = 6, 3, 5
            emb = rng.normal(size=(v, de))
            emb[0] = 0.0
            w = SiameseWeights(
                vocab_size=v,
                embed_dim=de,
                hidden_dim=dh,
                seq_len=ln,
                token_index={f"t{i}": i for i in range(1, v)},
                embedding=emb.astype(np.float32),
                kernel=rng.normal(size=(de, 4 * dh)).astype(np.float32),
                recurrent=rng.normal(size=(dh, 4 * dh)).astype(np.float32),
                bias=rng.normal(size=(4 * dh,)).astype(np.float32),
            )
            seq = rng.integers(0, v, size=ln)
            got = encode(seq, w)
            want = lstm_reference(
                seq.tolist(),
                w.embedding.astype(np.float64).tolist(),
                w.kernel.astype(np.float64).tolist(),
                w.recurrent.astype(np.float64).tolist(),
                w.bias.astype(np.float64).tolist(),
            )
            worst = max(worst, float(np.max(np.abs(got - np.asarray(want)))))
            draws += 1
    assert draws >= 100
    assert worst <= 1e-9, f"max abs diff {worst}"

    # published layer table: 26,808,300 embedding parameters at 300 dims
    path = tmp_path / "fig.slw"
    path.write_bytes(struct.pack("<4sIIII", b"SLW1", 26_808_300 // 300, 300, 75, 144))
    header = read_header(path)
    assert header.vocab_size == 89_361
    assert header.embedding_params == 26_808_300
    _report(f"LSTM oracle ({draws} draws, max diff {worst:.2e}) + header arithmetic V=89,361")


def test_svm_correctness():
    """Synthetic separable set: accuracy, dual feasibility, KKT, Platt."""
    started = time.perf_counter()
    X, y = synthetic_separable(n=200, dim=5, margin=0.1, seed=42)
    model = train(X, y, C=0.2, degree=2)
    elapsed = time.perf_counter() - started

    probs = model.predict_proba(X)
    accuracy = float(np.mean((probs >= 0.5).astype(int) == y))
    assert accuracy >= 0.95, f"train accuracy {accuracy}"

    alphas = np.abs(model.dual_coefs)
    assert np.all(alphas >= 0.0) and np.all(alphas <= model.C + 1e-12)
    assert abs(model.dual_coefs.sum()) <= 1e-6

    viol = kkt_violations(model, X, y)
    assert viol <= 1e-3, f"KKT violation {viol}"

    decisions = np.unique(model.decision(X))
    calibrated = 1.0 / (1.0 + np.exp(model.platt_a * decisions + model.platt_b))
    assert model.platt_a < 0
    assert np.all(np.diff(calibrated) > 0), "Platt probabilities not strictly monotone"
    assert elapsed < 10.0, f"runtime {elapsed:.2f}s"
    _report(
        f"SVM correctness (accuracy {accuracy:.3f}, KKT {viol:.1e}, {elapsed:.2f}s)"
    )


def test_typo_query_feature_ordering(norm_config):
    """The misspelled-cost query pairs best with its true counterpart."""
    table = fixture_table()
    vectors = {t: table.matrix[i].tolist() for t, i in table.vocab.items()}
    corpus = fixture_corpus()
    query = "what is cost for factnol trading"
    target_text = "what are fees or charges for fractional trading"
    q_tokens = preprocess(query, norm_config).fuzzy_token_set

    def oracle_score(text):
        tokens = preprocess(text, norm_config).fuzzy_token_set
        return alg1_reference(q_tokens, tokens, 0.6, 0.55, vectors)

    target = oracle_score(target_text)
    distractors = [rec for rec in corpus if rec.id != "q01"]
    assert len(distractors) >= 10
    worst_margin = min(target - oracle_score(rec.question) for rec in distractors)
    assert worst_margin > 0.0, f"margin {worst_margin}"

    # the engine agrees with the oracle on the target pair
    engine = fuzzy_intersection_ratio(
        q_tokens, preprocess(target_text, norm_config).fuzzy_token_set, FuzzyConfig(), table
    ).score
    assert engine == pytest.approx(target, abs=1e-9)
    _report(
        f"typo-query ordering (target {target:.4f} beats {len(distractors)} "
        f"distractors, margin {worst_margin:.4f})"
    )


def test_end_to_end_m1_retrieval(fixture_tree, capsys):
    """Fixture corpus: self-retrieval, unanswerable query, CLI == HTTP."""
    assert main(["--config", str(fixture_tree), "index"]) == 0
    capsys.readouterr()
    cfg = load_config(fixture_tree)
    client = TestClient(create_app(cfg))

    health = client.get("/healthz").json()
    assert health == {"status": "ok", "mode": "M1", "corpus_size": 25}

    for rec in fixture_corpus():
        payload = client.post("/v1/match", json={"query": rec.question}).json()
        assert payload["answered"] is True
        top = payload["matches"][0]
        assert top["id"] == rec.id, f"{rec.id} self-retrieved {top['id']}"
        assert np.allclose(top["features"], 1.0, atol=1e-5)
        assert len(top["features"]) == 4

    disjoint = client.post("/v1/match", json={"query": "zzz qqq uuu"}).json()
    assert disjoint["answered"] is False

    query = "how do i open an IRA?"
    assert main(["--config", str(fixture_tree), "query", query]) == 0
    cli_line = capsys.readouterr().out.rstrip("\n")
    http_bytes = client.post("/v1/match", json={"query": query, "top_k": 5}).content
    assert http_bytes == cli_line.encode("utf-8")
    _report("end-to-end M1 retrieval (25/25 self-retrievals, CLI == HTTP bytes)")


def test_persistence_round_trips(tmp_path, built_index):
    """Weights, index, and meta model survive save -> load."""
    weights = fixture_weights()
    save_weights(weights, tmp_path / "w.slw", tmp_path / "w.tokens")
    loaded_w = load_weights(tmp_path / "w.slw", tmp_path / "w.tokens")
    assert np.array_equal(loaded_w.embedding, weights.embedding)
    assert np.array_equal(loaded_w.kernel, weights.kernel)
    assert np.array_equal(loaded_w.recurrent, weights.recurrent)
    assert np.array_equal(loaded_w.bias, weights.bias)

    save_index(built_index, tmp_path / "i.qqix")
    loaded_i = load_index(tmp_path / "i.qqix")
    assert np.array_equal(loaded_i.unnorm, built_index.unnorm)
    assert np.array_equal(loaded_i.norm, built_index.norm)
    assert np.array_equal(loaded_i.avg, built_index.avg)

    X, y = synthetic_separable(n=80, seed=5)
    model = train(X, y)
    save_model(model, tmp_path / "m.json")
    loaded_m = load_model(tmp_path / "m.json")
    probe = np.random.default_rng(0).uniform(-1, 1, size=(100, 5))
    drift = float(np.max(np.abs(model.decision(probe) - loaded_m.decision(probe))))
    assert drift <= 1e-12, f"decision drift {drift}"
    _report(f"persistence round-trips (bitwise vectors, decision drift {drift:.1e})")


def test_evaluation_arithmetic():
    """Confusion (1,1,1,1) yields exactly 0.5 across the reported metrics."""
    report = EvalReport.from_confusion(tp=1, fp=1, tn=1, fn=1, threshold=0.7)
    assert report.accuracy == 0.5
    assert report.macro_f1 == 0.5
    assert report.precision_pos == 0.5
    assert report.recall_pos == 0.5
    _report("evaluation arithmetic (confusion 1,1,1,1 -> 0.5 exact)")
