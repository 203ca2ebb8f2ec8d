"""Label-map files in the engine's format: 16-bit grayscale PNG, label
value = pixel value, label 0 = background."""
from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image


def write_label_map(path: Path, labels: np.ndarray) -> None:
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ValueError("label map must be 2D")
    if labels.min() < 0 or labels.max() > np.iinfo(np.uint16).max:
        raise ValueError("labels must fit in uint16")
    Image.fromarray(labels.astype(np.uint16)).save(path)


def read_label_map(path: Path) -> np.ndarray:
    arr = np.array(Image.open(path))
    if arr.ndim != 2:
        raise ValueError(f"{path}: label map PNG must be single-channel")
    return arr.astype(np.uint16)
