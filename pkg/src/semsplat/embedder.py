"""Text-to-embedding providers.

The real encoder lives behind the sidecar's POST /embed contract; the mock
embedder hashes text into a seeded unit vector so offline tests and the CLI
work without any model.
"""
from __future__ import annotations

import hashlib

import httpx
import numpy as np

from .bank import DEFAULT_DIM
from .scene import Embedding


class EmbedderError(RuntimeError):
    """External embedder unreachable or returned a malformed payload."""


class MockEmbedder:
    """Deterministic text encoder: seeded hash of the text drives a RNG that
    emits one unit vector per text. Same text always maps to the same vector."""

    def __init__(self, dim: int = DEFAULT_DIM, seed: int = 0):
        self.dim = dim
        self.seed = seed

    def embed(self, texts: list[str]) -> list[Embedding]:
        out = []
        for text in texts:
            digest = hashlib.sha256(f"{self.seed}:{text}".encode("utf-8")).digest()
            rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
            v = rng.standard_normal(self.dim)
            out.append(Embedding(v / np.linalg.norm(v)))
        return out


class RemoteEmbedder:
    """Client for the sidecar's POST /embed {texts} -> {embeddings} contract."""

    def __init__(self, url: str, timeout: float = 10.0):
        self.url = url.rstrip("/")
        self.timeout = timeout

    def embed(self, texts: list[str]) -> list[Embedding]:
        try:
            resp = httpx.post(f"{self.url}/embed", json={"texts": texts}, timeout=self.timeout)
            resp.raise_for_status()
            payload = resp.json()
        except Exception as exc:
            raise EmbedderError(f"embedder at {self.url} failed: {exc}") from exc
        embeddings = payload.get("embeddings")
        if not isinstance(embeddings, list) or len(embeddings) != len(texts):
            raise EmbedderError("embedder returned a malformed payload")
        return [Embedding(np.asarray(e, dtype=np.float64)).normalized() for e in embeddings]
