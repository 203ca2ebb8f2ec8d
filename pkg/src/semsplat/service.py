"""HTTP service: scene registry, render and query endpoints.

Scenes load once at startup and are immutable afterwards; request handlers
only read, so concurrent identical queries return identical payloads.
"""
from __future__ import annotations

import base64
import io
import time
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Response
from PIL import Image
from pydantic import BaseModel, Field

from .bank import MemoryBank
from .embedder import EmbedderError, MockEmbedder, RemoteEmbedder
from .formats import SceneBundle, read_bank, read_scene
from .query import (
    DEFAULT_CANONICAL_PHRASES,
    DEFAULT_THRESHOLD,
    QuerySpec,
    localize,
    relevancy_map,
    segment,
    segment_multiclass,
)
from .rasterize import DEFAULT_TILE_SIZE, render_tiled
from .scene import Embedding, PinholeCamera


class CameraModel(BaseModel):
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    world_to_camera: list[float] = Field(min_length=16, max_length=16)

    def to_camera(self) -> PinholeCamera:
        try:
            return PinholeCamera(
                fx=self.fx,
                fy=self.fy,
                cx=self.cx,
                cy=self.cy,
                width=self.width,
                height=self.height,
                world_to_camera=np.array(self.world_to_camera).reshape(4, 4),
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=f"malformed camera: {exc}") from exc


class RenderRequest(BaseModel):
    camera: CameraModel
    tile_size: int | None = None
    include_feature: bool = False


class QueryRequest(BaseModel):
    camera: CameraModel
    mode: str = "locate"  # locate | segment | multiclass
    embedding: list[float] | None = None
    text: str | None = None
    embeddings: list[list[float]] | None = None
    texts: list[str] | None = None
    threshold: float | None = None
    canonical_embeddings: list[list[float]] | None = None


def _png_bytes(arr: np.ndarray, mode: str | None = None) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(arr, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def _ms(t0: float) -> float:
    return (time.perf_counter() - t0) * 1000.0


class SceneRegistry:
    def __init__(self, scenes_dir: str | Path):
        self.scenes: dict[str, SceneBundle] = {}
        for path in sorted(Path(scenes_dir).glob("*.slgs")):
            bundle = read_scene(path)
            bank_path = path.with_suffix(".bank")
            if bank_path.exists():
                bundle.bank = read_bank(bank_path)
            self.scenes[path.stem] = bundle

    def get(self, name: str) -> SceneBundle:
        if name not in self.scenes:
            raise HTTPException(status_code=404, detail=f"unknown scene {name!r}")
        return self.scenes[name]


def create_app(
    scenes_dir: str | Path,
    embedder_url: str | None = None,
    threshold: float = DEFAULT_THRESHOLD,
    tile_size: int = DEFAULT_TILE_SIZE,
    use_mock_embedder: bool = False,
    reject_radius: float | None = None,
) -> FastAPI:
    app = FastAPI(title="semsplat")
    registry = SceneRegistry(scenes_dir)
    canonical_cache: dict[int, tuple[Embedding, ...]] = {}

    def embed_texts(texts: list[str], dim: int) -> list[Embedding]:
        if embedder_url:
            try:
                return RemoteEmbedder(embedder_url).embed(texts)
            except EmbedderError as exc:
                raise HTTPException(status_code=502, detail=str(exc)) from exc
        if use_mock_embedder:
            return MockEmbedder(dim=dim).embed(texts)
        raise HTTPException(
            status_code=400, detail="text queries need a configured embedder"
        )

    def canonical_for(dim: int) -> tuple[Embedding, ...]:
        if dim not in canonical_cache:
            canonical_cache[dim] = tuple(embed_texts(list(DEFAULT_CANONICAL_PHRASES), dim))
        return canonical_cache[dim]

    def bank_of(bundle: SceneBundle) -> MemoryBank:
        if bundle.bank is None:
            raise HTTPException(status_code=400, detail="scene has no memory bank")
        return bundle.bank

    @app.get("/healthz")
    def healthz():
        return Response(content="ok", media_type="text/plain")

    @app.get("/scenes")
    def scenes():
        t0 = time.perf_counter()
        return {"scenes": sorted(registry.scenes), "total_ms": _ms(t0)}

    @app.post("/scenes/{name}/render")
    def render(name: str, req: RenderRequest):
        t0 = time.perf_counter()
        bundle = registry.get(name)
        cam = req.camera.to_camera()
        t_render = time.perf_counter()
        out = render_tiled(bundle.gaussians, cam, tile_size=req.tile_size or tile_size)
        render_ms = _ms(t_render)
        rgb8 = np.clip(out.rgb.values * 255.0 + 0.5, 0, 255).astype(np.uint8)
        png = _png_bytes(rgb8)
        if req.include_feature:
            return {
                "rgb_png_b64": base64.b64encode(png).decode("ascii"),
                "feature_b64": base64.b64encode(
                    out.feature.values.astype("<f4").tobytes()
                ).decode("ascii"),
                "width": cam.width,
                "height": cam.height,
                "render_ms": render_ms,
                "total_ms": _ms(t0),
            }
        return Response(
            content=png,
            media_type="image/png",
            headers={"X-Render-Ms": f"{render_ms:.3f}", "X-Total-Ms": f"{_ms(t0):.3f}"},
        )

    @app.post("/scenes/{name}/query")
    def query(name: str, req: QueryRequest):
        t0 = time.perf_counter()
        bundle = registry.get(name)
        bank = bank_of(bundle)
        cam = req.camera.to_camera()
        if req.mode not in ("locate", "segment", "multiclass"):
            raise HTTPException(status_code=400, detail=f"unknown mode {req.mode!r}")

        if req.canonical_embeddings:
            canon = tuple(
                Embedding(np.asarray(c, dtype=np.float64)).normalized()
                for c in req.canonical_embeddings
            )
        else:
            canon = canonical_for(bank.dim)

        def make_query(emb: Embedding) -> QuerySpec:
            if emb.dim != bank.dim:
                raise HTTPException(
                    status_code=400,
                    detail=f"embedding dim {emb.dim} does not match bank dim {bank.dim}",
                )
            return QuerySpec(
                query_embedding=emb,
                canonical_embeddings=canon,
                threshold=req.threshold if req.threshold is not None else threshold,
            )

        if req.mode == "multiclass":
            if req.embeddings:
                embs = [
                    Embedding(np.asarray(e, dtype=np.float64)).normalized()
                    for e in req.embeddings
                ]
            elif req.texts:
                embs = embed_texts(req.texts, bank.dim)
            else:
                raise HTTPException(
                    status_code=400, detail="multiclass needs embeddings or texts"
                )
            queries = [make_query(e) for e in embs]
        else:
            if req.embedding is not None:
                emb = Embedding(np.asarray(req.embedding, dtype=np.float64)).normalized()
            elif req.text:
                emb = embed_texts([req.text], bank.dim)[0]
            else:
                raise HTTPException(status_code=400, detail="query needs embedding or text")
            queries = [make_query(emb)]

        t_render = time.perf_counter()
        out = render_tiled(bundle.gaussians, cam, tile_size=tile_size)
        render_ms = _ms(t_render)
        t_query = time.perf_counter()

        if req.mode == "multiclass":
            classes = segment_multiclass(
                out.feature, bank, queries, reject_radius=reject_radius
            )
            query_ms = _ms(t_query)
            counts = {int(c): int(n) for c, n in zip(*np.unique(classes, return_counts=True))}
            return {
                "classes_png_b64": base64.b64encode(
                    _png_bytes(classes.astype(np.uint16))
                ).decode("ascii"),
                "class_counts": counts,
                "render_ms": render_ms,
                "query_ms": query_ms,
                "total_ms": _ms(t0),
            }

        rm = relevancy_map(out.feature, bank, queries[0], reject_radius=reject_radius)
        stats = {
            "min": float(rm.scores.min()),
            "max": float(rm.scores.max()),
            "mean": float(rm.scores.mean()),
        }
        if req.mode == "locate":
            x, y = localize(rm)
            return {
                "x": x,
                "y": y,
                "score": float(rm.scores[y, x]),
                "relevancy": stats,
                "render_ms": render_ms,
                "query_ms": _ms(t_query),
                "total_ms": _ms(t0),
            }
        mask = segment(rm, queries[0].threshold)
        return {
            "mask_png_b64": base64.b64encode(
                _png_bytes((mask * 255).astype(np.uint8))
            ).decode("ascii"),
            "pixels": int(mask.sum()),
            "relevancy": stats,
            "render_ms": render_ms,
            "query_ms": _ms(t_query),
            "total_ms": _ms(t0),
        }

    return app
