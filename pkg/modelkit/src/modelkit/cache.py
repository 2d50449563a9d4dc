"""Precompute the engine's sentence-embedding cache file.

Cache lines are {"text": <exact unnormalized text>, "vector": [...]},
one JSON object per line, deduplicated on the text key.  Keys are the
engine's unnormalized preprocessed form, produced by the engine CLI so
cache keys can never drift from query-time keys.
"""

from __future__ import annotations

import json
from pathlib import Path

from .embedder import make_embedder
from .textprep import DEFAULT_CMD, preprocess_texts


def read_corpus_questions(path: str | Path) -> list[str]:
    texts = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            texts.append(json.loads(line)["question"])
        except (json.JSONDecodeError, KeyError) as exc:
            raise ValueError(f"{path}:{lineno}: bad corpus line: {exc}") from None
    return texts


def export_sentence_cache(
    texts: list[str],
    model_name: str,
    out_path: str | Path,
    engine_cmd: tuple[str, ...] = DEFAULT_CMD,
) -> int:
    """Embed the unnormalized form of each text; returns lines written."""
    embedder = make_embedder(model_name)
    rows = preprocess_texts(list(texts), cmd=engine_cmd)
    keys = []
    seen = set()
    for row in rows:
        key = row["unnormalized"]
        if key not in seen:
            seen.add(key)
            keys.append(key)
    vectors = embedder.embed(keys)
    with Path(out_path).open("w", encoding="utf-8") as fh:
        for key, vec in zip(keys, vectors):
            fh.write(json.dumps({"text": key, "vector": [float(x) for x in vec]}) + "\n")
    return len(keys)
