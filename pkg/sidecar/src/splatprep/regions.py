"""Per-(view, label) region embeddings from RGB images + voted label maps.

Output is the engine's embeddings JSON: {"dim": D, "records": [{"view",
"label", "values"}]}. Labels absent from a view get no record -- the engine
inserts zero sentinels for those when it builds the bank.
"""
from __future__ import annotations

import json
import warnings
from pathlib import Path

import numpy as np

from .encoder import MockImageEncoder

GRAY = 128  # fill value outside the mask for masked crops


def region_crop(image: np.ndarray, mask: np.ndarray, masked: bool = True) -> np.ndarray:
    """Bounding-box crop of the mask region; by default pixels outside the
    mask are flattened to gray so the encoder sees only the object."""
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        raise ValueError("empty mask region")
    crop = image[ys.min() : ys.max() + 1, xs.min() : xs.max() + 1].copy()
    if masked:
        sub = mask[ys.min() : ys.max() + 1, xs.min() : xs.max() + 1]
        crop[~sub] = GRAY
    return crop


def embed_regions(
    images: list[np.ndarray],
    label_maps: list[np.ndarray],
    encoder: MockImageEncoder | None = None,
    masked: bool = True,
) -> dict:
    """One record per (view, label) present in that view's voted map."""
    if len(images) != len(label_maps):
        raise ValueError("one label map per image required")
    encoder = encoder or MockImageEncoder()
    records = []
    for view, (image, labels) in enumerate(zip(images, label_maps)):
        if image.shape[:2] != labels.shape:
            raise ValueError(f"view {view}: image and label map sizes differ")
        for label in np.unique(labels):
            if label == 0:
                continue
            mask = labels == label
            if not mask.any():  # pragma: no cover - unique() guarantees presence
                warnings.warn(f"view {view} label {label}: empty region, skipped")
                continue
            vec = encoder.embed(region_crop(image, mask, masked=masked))
            records.append(
                {"view": view, "label": int(label), "values": vec.tolist()}
            )
    return {"dim": encoder.dim, "records": records}


def write_embeddings(path: Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload))
