import json

import numpy as np
import pytest

from qqmatch.errors import CacheMissError, FormatError, TransportError
from qqmatch.sentence import (
    DisabledProvider,
    FileCacheProvider,
    RemoteProvider,
    sentence_score,
)
from qqmatch.testing import sentence_vector


def _write_cache(tmp_path, entries):
    path = tmp_path / "cache.jsonl"
    path.write_text("\n".join(json.dumps(e) for e in entries) + "\n", encoding="utf-8")
    return path


class TestFileCache:
    def test_exact_hit(self, tmp_path):
        v = [0.1, 0.2, 0.3]
        provider = FileCacheProvider(_write_cache(tmp_path, [{"text": "what is poa", "vector": v}]))
        assert provider.dim == 3
        assert np.allclose(provider.embed("what is poa"), v)

    def test_miss(self, tmp_path):
        provider = FileCacheProvider(_write_cache(tmp_path, [{"text": "a", "vector": [1.0]}]))
        with pytest.raises(CacheMissError):
            provider.embed("unseen text")

    def test_dim_inconsistency(self, tmp_path):
        with pytest.raises(FormatError, match="dim"):
            FileCacheProvider(
                _write_cache(
                    tmp_path,
                    [{"text": "a", "vector": [1.0, 2.0]}, {"text": "b", "vector": [1.0]}],
                )
            )

    def test_duplicate_key(self, tmp_path):
        with pytest.raises(FormatError, match="duplicate"):
            FileCacheProvider(
                _write_cache(
                    tmp_path,
                    [{"text": "a", "vector": [1.0]}, {"text": "a", "vector": [2.0]}],
                )
            )

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        path.write_text('{"text": "a"}\n', encoding="utf-8")
        with pytest.raises(FormatError):
            FileCacheProvider(path)

    def test_empty_cache(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        path.write_text("", encoding="utf-8")
        with pytest.raises(FormatError, match="empty"):
            FileCacheProvider(path)


class TestRemote:
    def test_embed(self, embed_server):
        provider = RemoteProvider(embed_server, timeout_ms=2000)
        v = provider.embed("what is poa")
        assert v.shape == (12,)
        assert provider.dim == 12
        assert np.allclose(v, sentence_vector("what is poa", 12))

    def test_batch(self, embed_server):
        provider = RemoteProvider(embed_server, timeout_ms=2000)
        vs = provider.embed_batch(["a", "b", "a"])
        assert len(vs) == 3
        assert np.allclose(vs[0], vs[2])

    def test_unreachable(self):
        provider = RemoteProvider("http://127.0.0.1:1", timeout_ms=200)
        with pytest.raises(TransportError):
            provider.embed("x")


class TestDisabled:
    def test_disabled_raises(self):
        with pytest.raises(CacheMissError):
            DisabledProvider().embed("anything")


class TestSentenceScore:
    def test_self(self):
        v = np.array([0.2, -0.5, 1.0])
        assert sentence_score(v, v) == pytest.approx(1.0)

    def test_zero(self):
        assert sentence_score(np.zeros(3), np.ones(3)) == 0.0

    def test_orthogonal(self):
        assert sentence_score(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0
