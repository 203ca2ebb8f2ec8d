"""Preprocessing sidecar for the splatting engine.

Wraps the external neural models the engine deliberately excludes --
segmentation, mask tracking, text/image encoding -- behind deterministic
mocks and a pluggable tracker command, and emits files in the engine's
formats (16-bit label-map PNGs, per-(view,label) embeddings JSON). Also
serves the POST /embed contract the engine's query path consumes.
"""
from .encoder import MockImageEncoder, MockTextEncoder
from .job import PreprocessJob
from .regions import embed_regions, write_embeddings
from .track import segment_and_track

__all__ = [
    "MockImageEncoder",
    "MockTextEncoder",
    "PreprocessJob",
    "embed_regions",
    "segment_and_track",
    "write_embeddings",
]
