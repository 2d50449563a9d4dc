"""JSON rendering shared by the CLI and the HTTP service.

Both surfaces must emit byte-identical match payloads, so every response
is serialized here, with stable key order and default separators.
"""

from __future__ import annotations

import json

from .index import MatchResponse


def _round_floats(values) -> list[float]:
    return [float(v) for v in values]


def render_match_response(response: MatchResponse) -> str:
    return json.dumps(
        {
            "matches": [
                {
                    "id": m.record.id,
                    "question": m.record.question,
                    "answer": m.record.answer,
                    "probability": m.probability,
                    "features": _round_floats(m.features),
                }
                for m in response.matches
            ],
            "answered": response.answered,
            "degraded": response.degraded,
        }
    )


def render_score_pair(features, probability: float, label: str, degraded: bool) -> str:
    return json.dumps(
        {
            "features": _round_floats(features),
            "probability": float(probability),
            "label": label,
            "degraded": degraded,
        }
    )


def render_health(mode: str, corpus_size: int) -> str:
    return json.dumps({"status": "ok", "mode": mode, "corpus_size": corpus_size})


def render_error(kind: str, message: str) -> str:
    return json.dumps({"error": kind, "message": message})
