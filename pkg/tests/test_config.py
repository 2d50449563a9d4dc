import json

import pytest

from qqmatch.config import load_config, load_resources
from qqmatch.errors import ConfigError


def _rewrite(config_path, mutate):
    config = json.loads(config_path.read_text())
    mutate(config)
    config_path.write_text(json.dumps(config))
    return config_path


class TestLoadConfig:
    def test_fixture_tree_loads(self, fixture_tree):
        cfg = load_config(fixture_tree)
        assert cfg.fuzzy.threshold1 == 0.6
        assert cfg.top_k == 5
        assert cfg.provider_kind == "disabled"

    def test_relative_paths_resolve_against_config_dir(self, fixture_tree):
        cfg = load_config(fixture_tree)
        assert cfg.embedding_table == (fixture_tree.parent / "table.vec").resolve()

    def test_fuzzy_threshold_override_flows_through(self, fixture_tree):
        _rewrite(fixture_tree, lambda c: c.update(fuzzy={"threshold1": 0.9, "threshold2": 0.8}))
        resources = load_resources(load_config(fixture_tree))
        assert resources.fuzzy_config.threshold1 == 0.9
        assert resources.fuzzy_config.threshold2 == 0.8

    def test_fuzzy_threshold_out_of_range(self, fixture_tree):
        _rewrite(fixture_tree, lambda c: c.update(fuzzy={"threshold1": 1.2}))
        with pytest.raises(ConfigError):
            load_config(fixture_tree)

    def test_classification_threshold_overrides_models(self, fixture_tree):
        _rewrite(fixture_tree, lambda c: c.update(classification_threshold=0.42))
        resources = load_resources(load_config(fixture_tree))
        assert resources.meta_m1.threshold == 0.42
        assert resources.meta_m5.threshold == 0.42

    def test_classification_threshold_range(self, fixture_tree):
        _rewrite(fixture_tree, lambda c: c.update(classification_threshold=1.5))
        with pytest.raises(ConfigError):
            load_config(fixture_tree)

    def test_missing_required_key(self, fixture_tree):
        def drop(c):
            del c["paths"]["embedding_table"]

        _rewrite(fixture_tree, drop)
        with pytest.raises(ConfigError, match="embedding_table"):
            load_config(fixture_tree)

    def test_remote_without_endpoint(self, fixture_tree):
        _rewrite(fixture_tree, lambda c: c.update(sentence_provider={"kind": "remote"}))
        with pytest.raises(ConfigError, match="endpoint"):
            load_config(fixture_tree)

    def test_bad_siamese_score(self, fixture_tree):
        _rewrite(fixture_tree, lambda c: c.update(siamese_score="euclid"))
        with pytest.raises(ConfigError, match="siamese_score"):
            load_config(fixture_tree)

    def test_shared_weights_default(self, fixture_tree):
        cfg = load_config(fixture_tree)
        assert cfg.weights_norm == cfg.weights_unnorm
        resources = load_resources(cfg)
        assert resources.weights_norm is resources.weights_unnorm

    def test_dot_mode_flows_through(self, fixture_tree):
        _rewrite(fixture_tree, lambda c: c.update(siamese_score="dot"))
        resources = load_resources(load_config(fixture_tree))
        assert resources.use_cosine is False
