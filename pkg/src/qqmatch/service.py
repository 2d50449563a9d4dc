"""HTTP service over the loaded engine.

Endpoints: POST /v1/match, POST /v1/score-pair, GET /healthz.  Bodies
are parsed by hand so malformed JSON reliably yields a 400, and every
success body comes from :mod:`qqmatch.wire` so the CLI and the service
emit byte-identical payloads.
"""

from __future__ import annotations

import json

import numpy as np
from fastapi import FastAPI, Request, Response

from . import wire
from .config import EngineConfig, load_resources
from .errors import ConfigError
from .index import QuestionIndex, Resources, load_index, match_query, score_pair


def _json_response(payload: str, status_code: int = 200) -> Response:
    return Response(content=payload, status_code=status_code, media_type="application/json")


def _error(status: int, kind: str, message: str) -> Response:
    return _json_response(wire.render_error(kind, message), status_code=status)


def pick_pair_model(resources: Resources, n_features: int):
    """Prefer the 5-feature model when the provider delivered; fall back to M1."""
    if n_features == 5 and resources.meta_m5 is not None:
        return resources.meta_m5, 5
    if resources.meta_m1 is None:
        raise ConfigError("no M1 meta model loaded for 4-feature scoring")
    return resources.meta_m1, 4


def create_app(cfg: EngineConfig) -> FastAPI:
    """Load every resource eagerly; a missing file must fail startup."""
    resources = load_resources(cfg)
    if cfg.index is None:
        raise ConfigError("paths.index is required to serve")
    if not cfg.index.is_file():
        raise ConfigError(f"paths.index references missing file: {cfg.index}")
    index: QuestionIndex = load_index(cfg.index)

    app = FastAPI(title="qqmatch", docs_url=None, redoc_url=None)

    @app.get("/healthz")
    def healthz() -> Response:
        return _json_response(wire.render_health(index.mode, len(index)))

    @app.post("/v1/match")
    async def match(request: Request) -> Response:
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _error(400, "bad_request", f"malformed JSON: {exc}")
        if not isinstance(body, dict) or not isinstance(body.get("query"), str):
            return _error(400, "bad_request", "body must be {\"query\": str, \"top_k\"?: int}")
        top_k = body.get("top_k", cfg.top_k)
        if not isinstance(top_k, int) or top_k < 1:
            return _error(400, "bad_request", "top_k must be a positive integer")
        response = match_query(body["query"], index, resources, top_k=top_k)
        return _json_response(wire.render_match_response(response))

    @app.post("/v1/score-pair")
    async def score(request: Request) -> Response:
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _error(400, "bad_request", f"malformed JSON: {exc}")
        if (
            not isinstance(body, dict)
            or not isinstance(body.get("question1"), str)
            or not isinstance(body.get("question2"), str)
        ):
            return _error(400, "bad_request", "body must be {\"question1\": str, \"question2\": str}")
        features = score_pair(body["question1"], body["question2"], resources)
        model, used = pick_pair_model(resources, len(features))
        feats = np.asarray(features[:used])
        probability = model.predict_proba(feats)
        degraded = resources.provider.kind != "disabled" and len(features) == 4
        return _json_response(
            wire.render_score_pair(feats, probability, model.classify(feats), degraded)
        )

    return app
