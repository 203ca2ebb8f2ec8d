"""Deterministic mock encoders standing in for the CLIP text/image models.

Both hash their input into a seeded RNG that emits one unit vector, so the
same input always maps to the same embedding. The text construction matches
the engine's built-in mock embedder, so offline text queries against banks
built from this sidecar line up without a shared process.
"""
from __future__ import annotations

import hashlib

import numpy as np

DEFAULT_DIM = 512
DEFAULT_CANONICAL_PHRASES = ("object", "things", "stuff", "texture")


def _seeded_unit_vector(digest: bytes, dim: int) -> np.ndarray:
    rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


class MockTextEncoder:
    """Text -> unit vector; identical construction to the engine's mock."""

    def __init__(self, dim: int = DEFAULT_DIM, seed: int = 0):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.seed = seed

    def embed(self, texts: list[str]) -> np.ndarray:
        out = np.empty((len(texts), self.dim))
        for i, text in enumerate(texts):
            digest = hashlib.sha256(f"{self.seed}:{text}".encode("utf-8")).digest()
            out[i] = _seeded_unit_vector(digest, self.dim)
        return out


class MockImageEncoder:
    """Image region -> unit vector, keyed by the region's pixel content."""

    def __init__(self, dim: int = DEFAULT_DIM, seed: int = 0):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.seed = seed

    def embed(self, region: np.ndarray) -> np.ndarray:
        region = np.ascontiguousarray(region, dtype=np.uint8)
        h = hashlib.sha256(f"{self.seed}:{region.shape}".encode("utf-8"))
        h.update(region.tobytes())
        return _seeded_unit_vector(h.digest(), self.dim)
