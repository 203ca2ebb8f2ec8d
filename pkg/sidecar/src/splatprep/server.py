"""The /embed HTTP contract consumed by the engine's query path.

POST /embed {"texts": [...]} -> {"embeddings": [[f32; D], ...]} with every
vector unit-normalized; GET /canonical returns the default canonical
phrases with their embeddings so clients can seed a query without knowing
the phrase list.
"""
from __future__ import annotations

import time

from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel

from .encoder import DEFAULT_CANONICAL_PHRASES, DEFAULT_DIM, MockTextEncoder


class EmbedRequest(BaseModel):
    texts: list[str]


def create_app(dim: int = DEFAULT_DIM, seed: int = 0) -> FastAPI:
    app = FastAPI(title="splatprep-embed")
    encoder = MockTextEncoder(dim=dim, seed=seed)

    @app.get("/healthz")
    def healthz():
        return Response(content="ok", media_type="text/plain")

    @app.post("/embed")
    def embed(req: EmbedRequest):
        if not req.texts:
            raise HTTPException(status_code=400, detail="texts must be non-empty")
        t0 = time.perf_counter()
        vectors = encoder.embed(req.texts)
        return {
            "embeddings": [v.tolist() for v in vectors],
            "dim": encoder.dim,
            "embed_ms": (time.perf_counter() - t0) * 1000.0,
        }

    @app.get("/canonical")
    def canonical():
        phrases = list(DEFAULT_CANONICAL_PHRASES)
        vectors = encoder.embed(phrases)
        return {
            "phrases": phrases,
            "embeddings": [v.tolist() for v in vectors],
            "dim": encoder.dim,
        }

    return app
