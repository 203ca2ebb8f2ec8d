"""Latency benchmarks for the hot paths, comparing compute backends.

Render: tiled rasterization of a random 100k-splat cloud at 416 x 576.
Query: relevancy map (snap + per-unique-entry scoring) over a 256-object
label image at the same resolution with 4 canonical phrases.
"""
from __future__ import annotations

import time

import numpy as np

from .backend import resolve_backend
from .bank import build_bank, label_image
from .embedder import MockEmbedder
from .query import DEFAULT_CANONICAL_PHRASES, QuerySpec, relevancy_map
from .rasterize import DEFAULT_TILE_SIZE, render_tiled
from .scene import LabelMap
from .synthetic import axis_camera, random_cloud

BENCH_WIDTH = 416
BENCH_HEIGHT = 576


def _available_backends() -> list[str]:
    backends = ["numpy"]
    try:
        resolve_backend("numba")
        backends.insert(0, "numba")
    except RuntimeError:
        pass
    return backends


def _time(fn, warmup: int, runs: int) -> dict:
    for _ in range(warmup):
        fn()
    times = []
    for _ in range(runs):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1000.0)
    return {
        "mean_ms": float(np.mean(times)),
        "min_ms": float(np.min(times)),
        "max_ms": float(np.max(times)),
        "runs": len(times),
    }


def bench_render(
    n_gaussians: int = 100_000,
    width: int = BENCH_WIDTH,
    height: int = BENCH_HEIGHT,
    tile_size: int = DEFAULT_TILE_SIZE,
    runs: int = 5,
    warmup: int = 2,
    seed: int = 0,
    backends: list[str] | None = None,
) -> dict:
    cam = axis_camera((0, 0, 0), fx=300.0, fy=300.0, width=width, height=height)
    cloud = random_cloud(n_gaussians, cam, np.random.default_rng(seed))
    results = {}
    for backend in backends or _available_backends():
        results[backend] = _time(
            lambda: render_tiled(cloud, cam, tile_size=tile_size, backend=backend),
            warmup,
            runs,
        )
    return {
        "benchmark": "render_tiled",
        "gaussians": n_gaussians,
        "resolution": [width, height],
        "tile_size": tile_size,
        "backends": results,
    }


def query_fixture(
    n_objects: int = 256,
    width: int = BENCH_WIDTH,
    height: int = BENCH_HEIGHT,
    dim: int = 512,
    seed: int = 0,
):
    """Bank + feature map with every object present somewhere in the view."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(1, n_objects + 1, size=(height, width)).astype(np.uint16)
    labels.ravel()[:n_objects] = np.arange(1, n_objects + 1)
    lm = LabelMap(labels)
    embedder = MockEmbedder(dim=dim)
    embeddings = {}
    for label in range(1, n_objects + 1):
        for view in (0, 1):
            embeddings[(view, label)] = embedder.embed([f"object-{label}-view-{view}"])[0]
    bank = build_bank([lm], embeddings, seed=seed, dim=dim, num_views=2)
    fm = label_image(lm, bank)
    canon = tuple(embedder.embed(list(DEFAULT_CANONICAL_PHRASES)))
    q = QuerySpec(query_embedding=embedder.embed(["the queried thing"])[0], canonical_embeddings=canon)
    return fm, bank, q


def bench_query(
    n_objects: int = 256,
    width: int = BENCH_WIDTH,
    height: int = BENCH_HEIGHT,
    runs: int = 10,
    warmup: int = 3,
    seed: int = 0,
    backends: list[str] | None = None,
) -> dict:
    fm, bank, q = query_fixture(n_objects, width, height, seed=seed)
    results = {}
    for backend in backends or _available_backends():
        results[backend] = _time(
            lambda: relevancy_map(fm, bank, q, backend=backend), warmup, runs
        )
    return {
        "benchmark": "query_relevancy_map",
        "objects": n_objects,
        "resolution": [width, height],
        "canonical_phrases": len(DEFAULT_CANONICAL_PHRASES),
        "backends": results,
    }


def format_table(report: dict) -> str:
    lines = [f"{report['benchmark']}  ({report['resolution'][0]}x{report['resolution'][1]})"]
    for backend, stats in report["backends"].items():
        lines.append(
            f"  {backend:>6}: mean {stats['mean_ms']:8.2f} ms   "
            f"min {stats['min_ms']:8.2f} ms   max {stats['max_ms']:8.2f} ms"
        )
    return "\n".join(lines)
