"""Engine configuration: one JSON file wiring every resource path.

Relative paths resolve against the config file's directory.  Static
resources (embedding table, weights, token index, normalization data,
meta models, sentence cache, corpus) are existence-checked when the
config is loaded; the index file is checked by the commands that read
it, since the index command creates it.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .embeddings import load_table
from .errors import ConfigError
from .fuzzy import FuzzyConfig
from .index import Resources
from .sentence import DisabledProvider, FileCacheProvider, RemoteProvider
from .siamese import load_weights
from .svm import load_model
from .textnorm import NormalizationConfig

ENV_VAR = "QQMATCH_CONFIG"

_NORM_KEYS = (
    "contractions",
    "products",
    "acronyms",
    "verb_exceptions",
    "verb_suffix_rules",
    "noun_exceptions",
    "noun_suffix_rules",
    "verb_lexicon",
    "noun_lexicon",
)


@dataclass
class EngineConfig:
    embedding_table: Path
    weights_unnorm: Path
    weights_norm: Path
    token_index: Path
    corpus: Path | None = None
    index: Path | None = None
    meta_model_m1: Path | None = None
    meta_model_m5: Path | None = None
    sentence_cache: Path | None = None
    normalization: dict[str, Path] | None = None
    provider_kind: str = "disabled"
    endpoint: str | None = None
    timeout_ms: int = 500
    fuzzy: FuzzyConfig = field(default_factory=FuzzyConfig)
    classification_threshold: float | None = None
    siamese_score: str = "cosine"
    prefilter_top_n: int | None = None
    host: str = "127.0.0.1"
    port: int = 8421
    top_k: int = 5


def resolve_config_path(explicit: str | None) -> Path:
    path = explicit or os.environ.get(ENV_VAR)
    if not path:
        raise ConfigError(f"no config given: pass --config or set {ENV_VAR}")
    return Path(path)


def load_config(path: str | Path, skip_meta_check: bool = False) -> EngineConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    base = path.parent

    def resolve(p: str | None) -> Path | None:
        return None if p is None else (base / p).resolve() if not Path(p).is_absolute() else Path(p)

    paths = raw.get("paths", {})
    required = ("embedding_table", "siamese_weights_unnormalized", "token_index")
    for key in required:
        if key not in paths:
            raise ConfigError(f"{path}: paths.{key} is required")

    norm_raw = paths.get("normalization")
    normalization = None
    if norm_raw is not None:
        missing = [k for k in _NORM_KEYS if k not in norm_raw]
        if missing:
            raise ConfigError(f"{path}: paths.normalization missing keys {missing}")
        normalization = {k: resolve(norm_raw[k]) for k in _NORM_KEYS}

    provider = raw.get("sentence_provider", {})
    kind = provider.get("kind", "disabled")
    if kind not in ("disabled", "file_cache", "remote"):
        raise ConfigError(f"{path}: sentence_provider.kind must be disabled|file_cache|remote")

    fuzzy_raw = raw.get("fuzzy", {})
    try:
        fuzzy = FuzzyConfig(
            threshold1=float(fuzzy_raw.get("threshold1", 0.6)),
            threshold2=float(fuzzy_raw.get("threshold2", 0.55)),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None

    threshold = raw.get("classification_threshold")
    if threshold is not None and not 0.0 <= float(threshold) <= 1.0:
        raise ConfigError(f"{path}: classification_threshold must be in [0, 1]")

    score = raw.get("siamese_score", "cosine")
    if score not in ("cosine", "dot"):
        raise ConfigError(f"{path}: siamese_score must be 'cosine' or 'dot'")

    retrieval = raw.get("retrieval", {})
    service = raw.get("service", {})
    cfg = EngineConfig(
        embedding_table=resolve(paths["embedding_table"]),
        weights_unnorm=resolve(paths["siamese_weights_unnormalized"]),
        weights_norm=resolve(
            paths.get("siamese_weights_normalized", paths["siamese_weights_unnormalized"])
        ),
        token_index=resolve(paths["token_index"]),
        corpus=resolve(paths.get("corpus")),
        index=resolve(paths.get("index")),
        meta_model_m1=resolve(paths.get("meta_model_m1")),
        meta_model_m5=resolve(paths.get("meta_model_m5")),
        sentence_cache=resolve(paths.get("sentence_cache")),
        normalization=normalization,
        provider_kind=kind,
        endpoint=provider.get("endpoint"),
        timeout_ms=int(provider.get("timeout_ms", 500)),
        fuzzy=fuzzy,
        classification_threshold=None if threshold is None else float(threshold),
        siamese_score=score,
        prefilter_top_n=retrieval.get("prefilter_top_n"),
        host=service.get("host", "127.0.0.1"),
        port=int(service.get("port", 8421)),
        top_k=int(raw.get("top_k", 5)),
    )
    if cfg.provider_kind == "file_cache" and cfg.sentence_cache is None:
        raise ConfigError(f"{path}: file_cache provider needs paths.sentence_cache")
    if cfg.provider_kind == "remote" and not cfg.endpoint:
        raise ConfigError(f"{path}: remote provider needs sentence_provider.endpoint")
    _check_static_files(cfg, skip_meta_check=skip_meta_check)
    return cfg


def _check_static_files(cfg: EngineConfig, skip_meta_check: bool = False) -> None:
    checks: list[tuple[str, Path | None]] = [
        ("paths.embedding_table", cfg.embedding_table),
        ("paths.siamese_weights_unnormalized", cfg.weights_unnorm),
        ("paths.siamese_weights_normalized", cfg.weights_norm),
        ("paths.token_index", cfg.token_index),
        ("paths.corpus", cfg.corpus),
        ("paths.sentence_cache", cfg.sentence_cache),
    ]
    if not skip_meta_check:
        checks.extend(
            [("paths.meta_model_m1", cfg.meta_model_m1), ("paths.meta_model_m5", cfg.meta_model_m5)]
        )
    if cfg.normalization:
        checks.extend((f"paths.normalization.{k}", p) for k, p in cfg.normalization.items())
    for name, p in checks:
        if p is not None and not p.is_file():
            raise ConfigError(f"{name} references missing file: {p}")


def load_norm_config(cfg: EngineConfig) -> NormalizationConfig:
    if cfg.normalization is None:
        return NormalizationConfig.default()
    return NormalizationConfig.from_paths(**cfg.normalization)


def build_provider(cfg: EngineConfig):
    if cfg.provider_kind == "file_cache":
        return FileCacheProvider(cfg.sentence_cache)
    if cfg.provider_kind == "remote":
        return RemoteProvider(cfg.endpoint, timeout_ms=cfg.timeout_ms)
    return DisabledProvider()


def load_resources(cfg: EngineConfig, with_meta: bool = True) -> Resources:
    weights_unnorm = load_weights(cfg.weights_unnorm, cfg.token_index)
    weights_norm = (
        weights_unnorm
        if cfg.weights_norm == cfg.weights_unnorm
        else load_weights(cfg.weights_norm, cfg.token_index)
    )
    meta_m1 = meta_m5 = None
    if with_meta:
        if cfg.meta_model_m1 is not None:
            meta_m1 = load_model(cfg.meta_model_m1)
        if cfg.meta_model_m5 is not None:
            meta_m5 = load_model(cfg.meta_model_m5)
        for model in (meta_m1, meta_m5):
            if model is not None and cfg.classification_threshold is not None:
                model.threshold = cfg.classification_threshold
    return Resources(
        norm_config=load_norm_config(cfg),
        table=load_table(cfg.embedding_table),
        weights_unnorm=weights_unnorm,
        weights_norm=weights_norm,
        provider=build_provider(cfg),
        fuzzy_config=cfg.fuzzy,
        meta_m1=meta_m1,
        meta_m5=meta_m5,
        use_cosine=cfg.siamese_score == "cosine",
        prefilter_top_n=cfg.prefilter_top_n,
    )
