"""Open-vocabulary querying: relevancy scoring against canonical phrases,
localization, threshold segmentation, and multi-class segmentation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bank import MemoryBank, snap_map
from .scene import Embedding, FeatureMap

DEFAULT_THRESHOLD = 0.5
DEFAULT_CANONICAL_PHRASES = ("object", "things", "stuff", "texture")


@dataclass(frozen=True)
class QuerySpec:
    query_embedding: Embedding
    canonical_embeddings: tuple[Embedding, ...]
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        object.__setattr__(self, "canonical_embeddings", tuple(self.canonical_embeddings))
        if not self.canonical_embeddings:
            raise ValueError("need at least one canonical embedding")
        if self.query_embedding.is_sentinel:
            raise ValueError("query embedding must be non-zero")
        dim = self.query_embedding.dim
        for c in self.canonical_embeddings:
            if c.dim != dim:
                raise ValueError("canonical embedding dimension mismatch")
            if c.is_sentinel:
                raise ValueError("canonical embeddings must be non-zero")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0,1)")


@dataclass(frozen=True)
class RelevancyMap:
    scores: np.ndarray  # (H, W) in [0, 1)

    def __post_init__(self):
        arr = np.asarray(self.scores, dtype=np.float64)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("scores must be a non-empty 2D array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("scores contain non-finite values")
        object.__setattr__(self, "scores", arr)

    @property
    def width(self) -> int:
        return self.scores.shape[1]

    @property
    def height(self) -> int:
        return self.scores.shape[0]


def _pair_score(a: float, b: float) -> float:
    # exp(a) / (exp(a) + exp(b)) computed stably
    return 1.0 / (1.0 + np.exp(b - a))


def relevancy(views, q: QuerySpec) -> float:
    """Max over present views of min over canonical phrases of the pairwise
    query-vs-canon softmax. Zero-sentinel views carry no information and are
    excluded; all-sentinel input scores 0."""
    qv = q.query_embedding.values
    canon = np.stack([c.values for c in q.canonical_embeddings])
    best = 0.0
    any_present = False
    for view in views:
        emb = view.values if isinstance(view, Embedding) else np.asarray(view, dtype=np.float64)
        if not np.any(emb):
            continue
        any_present = True
        a = float(emb @ qv)
        term = min(_pair_score(a, float(emb @ c)) for c in canon)
        best = max(best, term)
    return best if any_present else 0.0


def relevancy_many(entries, q: QuerySpec) -> np.ndarray:
    """relevancy() for a batch of bank entries at once; one matrix product
    per batch instead of per-view Python loops."""
    entries = list(entries)
    if not entries:
        return np.zeros(0)
    views = np.stack([[v.values for v in e.views] for e in entries])  # (E, V, D)
    qv = q.query_embedding.values
    canon = np.stack([c.values for c in q.canonical_embeddings])  # (C, D)
    a = views @ qv  # (E, V)
    b = views @ canon.T  # (E, V, C)
    term = (1.0 / (1.0 + np.exp(b - a[:, :, None]))).min(axis=2)  # (E, V)
    present = np.any(views, axis=2)
    term = np.where(present, term, 0.0)
    return term.max(axis=1)


def relevancy_map(
    fm: FeatureMap,
    bank: MemoryBank,
    q: QuerySpec,
    backend: str | None = None,
    reject_radius: float | None = None,
) -> RelevancyMap:
    """Relevancy per pixel, computed once per unique snapped entry and
    broadcast; background pixels score 0."""
    indices, unique = snap_map(fm, bank, backend=backend, reject_radius=reject_radius)
    # shifted lookup: entry index i -> lut[i + 1], BACKGROUND (-1) -> lut[0] = 0
    lut = np.zeros(len(bank) + 1)
    lut[[e.label for e in unique]] = relevancy_many(unique, q)
    scores = lut[indices + 1]
    return RelevancyMap(scores)


def localize(rm: RelevancyMap) -> tuple[int, int]:
    """(x, y) of the highest score; ties resolve row-major (smallest y, x)."""
    flat = int(np.argmax(rm.scores))
    y, x = divmod(flat, rm.width)
    return x, y


def segment(rm: RelevancyMap, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """Binary mask of scores strictly above the threshold."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0,1)")
    return rm.scores > threshold


def segment_multiclass(
    fm: FeatureMap,
    bank: MemoryBank,
    queries,
    backend: str | None = None,
    reject_radius: float | None = None,
) -> np.ndarray:
    """Per-pixel class index map: argmax over queries of relevancy, 1-based;
    ties go to the smallest query index, background pixels get class 0."""
    queries = list(queries)
    if not queries:
        raise ValueError("need at least one query")
    indices, unique = snap_map(fm, bank, backend=backend, reject_radius=reject_radius)
    # shifted lookup as in relevancy_map; lut[0] stays the background class 0
    lut = np.zeros(len(bank) + 1, dtype=np.int32)
    if unique:
        scores = np.stack([relevancy_many(unique, q) for q in queries])  # (Q, E)
        lut[[e.label for e in unique]] = scores.argmax(axis=0).astype(np.int32) + 1
    return lut[indices + 1].astype(np.int32)
