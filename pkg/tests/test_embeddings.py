import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qqmatch.embeddings import average_embedding, cosine, load_table, unit
from qqmatch.errors import ContractError, FormatError


def _write(tmp_path, text):
    p = tmp_path / "table.vec"
    p.write_text(text, encoding="utf-8")
    return p


class TestLoadTable:
    def test_two_token_fixture(self, tmp_path):
        table = load_table(_write(tmp_path, "2 3\na 1 0 0\nb 0 1 0\n"))
        assert table.dim == 3
        assert len(table.vocab) == 2
        assert np.allclose(table.vector("b"), [0, 1, 0])

    def test_row_width_mismatch(self, tmp_path):
        with pytest.raises(FormatError, match=":2"):
            load_table(_write(tmp_path, "1 3\na 1 0\n"))

    def test_empty_file(self, tmp_path):
        with pytest.raises(FormatError, match="header"):
            load_table(_write(tmp_path, ""))

    def test_duplicate_token(self, tmp_path):
        with pytest.raises(FormatError, match="duplicate"):
            load_table(_write(tmp_path, "2 2\na 1 0\na 0 1\n"))

    def test_row_count_mismatch(self, tmp_path):
        with pytest.raises(FormatError):
            load_table(_write(tmp_path, "3 2\na 1 0\nb 0 1\n"))

    def test_non_numeric(self, tmp_path):
        with pytest.raises(FormatError):
            load_table(_write(tmp_path, "1 2\na 1 x\n"))


class TestAverageEmbedding:
    @pytest.fixture()
    def small_table(self, tmp_path):
        return load_table(_write(tmp_path, "2 3\na 1 0 0\nb 0 1 0\n"))

    def test_single_word(self, small_table):
        assert np.allclose(average_embedding(["a"], small_table), [1, 0, 0])

    def test_midpoint(self, small_table):
        assert np.allclose(average_embedding(["a", "b"], small_table), [0.5, 0.5, 0])

    def test_out_of_vocab(self, small_table):
        assert np.allclose(average_embedding(["zzz"], small_table), [0, 0, 0])

    def test_oov_not_counted_in_denominator(self, small_table):
        assert np.allclose(average_embedding(["a", "zzz"], small_table), [1, 0, 0])

    def test_empty(self, small_table):
        assert np.allclose(average_embedding([], small_table), [0, 0, 0])

    def test_repeated_token_equals_single(self, small_table):
        one = average_embedding(["a"], small_table)
        many = average_embedding(["a"] * 7, small_table)
        assert np.allclose(one, many)


class TestCosine:
    def test_self(self):
        v = np.array([0.3, -0.2, 0.9])
        assert cosine(v, v) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_hand_value(self):
        # 1/sqrt(2)
        assert cosine(np.array([1.0, 1.0]), np.array([1.0, 0.0])) == pytest.approx(
            0.7071, abs=1e-4
        )

    def test_zero_vector(self):
        assert cosine(np.zeros(3), np.array([1.0, 2.0, 3.0])) == 0.0

    def test_dim_mismatch(self):
        with pytest.raises(ContractError):
            cosine(np.zeros(3), np.zeros(4))

    @given(
        st.lists(st.floats(-1e6, 1e6), min_size=4, max_size=4),
        st.lists(st.floats(-1e6, 1e6), min_size=4, max_size=4),
    )
    def test_bounded(self, u, v):
        c = cosine(np.array(u), np.array(v))
        assert -1.0 - 1e-9 <= c <= 1.0 + 1e-9

    @given(
        st.lists(st.floats(-100, 100), min_size=3, max_size=3),
        st.lists(st.floats(-100, 100), min_size=3, max_size=3),
        st.floats(1e-3, 1e3),
    )
    def test_scale_invariant(self, u, v, alpha):
        u = np.array(u)
        v = np.array(v)
        assert cosine(alpha * u, v) == pytest.approx(cosine(u, v), abs=1e-9)


class TestUnit:
    def test_zero_stays_zero(self):
        assert np.all(unit(np.zeros(4)) == 0.0)

    def test_norm_one(self):
        v = unit(np.array([3.0, 4.0]))
        assert np.linalg.norm(v) == pytest.approx(1.0)
