import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import alg1_reference, levenshtein_reference
from qqmatch.embeddings import EmbeddingTable
from qqmatch.errors import ContractError
from qqmatch.fuzzy import (
    FuzzyConfig,
    fuzzy_intersection_ratio,
    norm_levenshtein,
    scaled_cosine,
)
from qqmatch.textnorm import preprocess


def random_unit_table(tokens, dim=8, seed=0):
    rng = np.random.default_rng(seed)
    matrix = rng.normal(size=(len(tokens), dim))
    matrix /= np.linalg.norm(matrix, axis=1, keepdims=True)
    return EmbeddingTable(
        dim=dim, vocab={t: i for i, t in enumerate(tokens)}, matrix=matrix.astype(np.float32)
    )


class TestNormLevenshtein:
    def test_identical(self):
        assert norm_levenshtein("abc", "abc") == 0.0

    def test_total_substitution(self):
        assert norm_levenshtein("abc", "xyz") == 1.0

    def test_factnol_fractional(self):
        # DP oracle confirms edit distance 4 over max length 10
        assert levenshtein_reference("factnol", "fractional") == 4
        assert norm_levenshtein("factnol", "fractional") == pytest.approx(0.4)

    @given(st.text("abcdef", min_size=1, max_size=8), st.text("abcdef", min_size=1, max_size=8))
    def test_matches_reference(self, a, b):
        want = levenshtein_reference(a, b) / max(len(a), len(b))
        assert norm_levenshtein(a, b) == pytest.approx(want, abs=1e-12)

    @given(st.text("abcd", min_size=1, max_size=6), st.text("abcd", min_size=1, max_size=6))
    def test_bounds_and_symmetry(self, a, b):
        d = norm_levenshtein(a, b)
        assert 0.0 <= d <= 1.0
        assert d == norm_levenshtein(b, a)


class TestScaledCosine:
    def test_identical_word(self):
        table = random_unit_table(["a", "b"])
        assert scaled_cosine("a", "a", table) == pytest.approx(1.0)

    def test_antipodal(self):
        matrix = np.array([[1.0, 0.0], [-1.0, 0.0]], dtype=np.float32)
        table = EmbeddingTable(dim=2, vocab={"a": 0, "b": 1}, matrix=matrix)
        assert scaled_cosine("a", "b", table) == pytest.approx(0.0)

    def test_orthogonal(self):
        matrix = np.array([[1.0, 0.0], [0.0, 1.0]], dtype=np.float32)
        table = EmbeddingTable(dim=2, vocab={"a": 0, "b": 1}, matrix=matrix)
        assert scaled_cosine("a", "b", table) == pytest.approx(0.5)


class TestFuzzyIntersectionRatio:
    def test_identical_sets(self, table):
        res = fuzzy_intersection_ratio({"a", "b"}, {"a", "b"}, FuzzyConfig(), table)
        assert res.score == 1.0
        assert res.partial_overlap == 0.0

    def test_disjoint_sets(self, table):
        res = fuzzy_intersection_ratio({"fee"}, {"what"}, FuzzyConfig(), table)
        assert res.score == 0.0

    def test_empty_sets(self, table):
        assert fuzzy_intersection_ratio(set(), set(), FuzzyConfig(), table).score == 0.0

    def test_misspelled_query_scenario(self, norm_config, table):
        """Misspelled-cost query: syntactic catch for the typo, semantic for
        the money words; value checked against the independent oracle."""
        q1 = preprocess("what is cost for factnol trading", norm_config)
        q2 = preprocess("what are fees or charges for fractional trading", norm_config)
        res = fuzzy_intersection_ratio(q1.fuzzy_token_set, q2.fuzzy_token_set, FuzzyConfig(), table)
        kinds = {(p.word1, p.word2): p.kind for p in res.matched_pairs}
        assert kinds[("factnol", "fractional")] == "syntactic"
        assert kinds[("cost", "charges")] == "semantic"
        vectors = {t: table.matrix[i].tolist() for t, i in table.vocab.items()}
        want = alg1_reference(q1.fuzzy_token_set, q2.fuzzy_token_set, 0.6, 0.55, vectors)
        assert res.score == pytest.approx(want, abs=1e-12)

    def test_matched_pairs_meet_thresholds(self, table):
        cfg = FuzzyConfig()
        res = fuzzy_intersection_ratio(
            {"what", "is", "cost", "for", "factnol", "trading"},
            {"what", "are", "fees", "or", "charges", "for", "fractional", "trading"},
            cfg,
            table,
        )
        for pair in res.matched_pairs:
            threshold = cfg.threshold1 if pair.kind == "syntactic" else cfg.threshold2
            assert pair.pair_score >= threshold

    def test_result_identity(self, table):
        res = fuzzy_intersection_ratio({"fee", "cost"}, {"fee", "account"}, FuzzyConfig(), table)
        l0 = res.exact_overlap_count
        assert l0 == 1
        assert 0.0 < res.score <= 1.0

    def test_threshold_validation(self):
        with pytest.raises(ContractError):
            FuzzyConfig(threshold1=1.5)


_WORDS = [f"w{i}" for i in range(30)] + ["alpha", "alpah", "beta", "betta", "gamma", "gama"]


@st.composite
def token_sets(draw):
    s1 = draw(st.sets(st.sampled_from(_WORDS), max_size=8))
    s2 = draw(st.sets(st.sampled_from(_WORDS), max_size=8))
    return s1, s2


class TestProperties:
    @given(token_sets(), st.integers(0, 100))
    @settings(max_examples=200, deadline=None)
    def test_oracle_equivalence(self, sets, seed):
        s1, s2 = sets
        table = random_unit_table(_WORDS, seed=seed)
        cfg = FuzzyConfig()
        got = fuzzy_intersection_ratio(s1, s2, cfg, table).score
        vectors = {t: table.matrix[i].tolist() for t, i in table.vocab.items()}
        want = alg1_reference(s1, s2, cfg.threshold1, cfg.threshold2, vectors)
        assert got == pytest.approx(want, abs=1e-9)

    @given(token_sets(), st.integers(0, 100))
    @settings(max_examples=200, deadline=None)
    def test_gate_bounds_and_ceiling(self, sets, seed):
        s1, s2 = sets
        table = random_unit_table(_WORDS, seed=seed)
        res = fuzzy_intersection_ratio(s1, s2, FuzzyConfig(), table)
        assert 0.0 <= res.score <= 1.0
        if not (s1 & s2):
            assert res.score == 0.0
        else:
            assert res.score > 0.0
        if s1 and s1 == s2:
            assert res.score == 1.0
        elif res.score == 1.0:
            assert s1 == s2
        # each left word contributes at most one match
        assert res.partial_overlap <= len(s1 - s2) + 1e-12
