"""HTTP sidecar speaking the engine's embed protocol.

POST /embed {"texts": ["..."]} -> {"vectors": [[...]], "dim": d};
malformed bodies get a 400.  Stateless, safe for concurrent requests.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, Request, Response

from .embedder import make_embedder


def create_app(embedder) -> FastAPI:
    app = FastAPI(title="qqmatch-embed-sidecar", docs_url=None, redoc_url=None)

    @app.post("/embed")
    async def embed(request: Request) -> Response:
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _json({"error": "bad_request", "message": f"malformed JSON: {exc}"}, 400)
        if (
            not isinstance(body, dict)
            or not isinstance(body.get("texts"), list)
            or not all(isinstance(t, str) for t in body["texts"])
        ):
            return _json({"error": "bad_request", "message": 'body must be {"texts": [str]}'}, 400)
        vectors = embedder.embed(body["texts"])
        return _json({"vectors": [[float(x) for x in v] for v in vectors], "dim": embedder.dim})

    return app


def _json(payload: dict, status_code: int = 200) -> Response:
    return Response(
        content=json.dumps(payload), status_code=status_code, media_type="application/json"
    )


def serve_embed(port: int, model_name: str, host: str = "127.0.0.1") -> None:
    import uvicorn

    app = create_app(make_embedder(model_name))
    uvicorn.run(app, host=host, port=port, log_level="warning")
