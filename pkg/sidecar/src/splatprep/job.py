"""Preprocessing job description and input loading."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

DEFAULT_REPLICATES = 5


@dataclass(frozen=True)
class PreprocessJob:
    """One segmentation-and-tracking run over the input views.

    images: input RGB image paths, one per view (all the same size);
    out_dir: where label maps / embedding files land;
    replicates: K duplicated frames per view fed to the tracker;
    tracker_cmd: external tracker invocation template (see track.py), or
    None for the built-in deterministic color tracker.
    """

    images: tuple[Path, ...]
    out_dir: Path
    replicates: int = DEFAULT_REPLICATES
    tracker_cmd: str | None = None
    _sizes: tuple[tuple[int, int], ...] = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(Path(p) for p in self.images))
        object.__setattr__(self, "out_dir", Path(self.out_dir))
        if not self.images:
            raise ValueError("job needs at least one input image")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        sizes = []
        for p in self.images:
            if not p.is_file():
                raise FileNotFoundError(f"input image not found: {p}")
            with Image.open(p) as im:
                sizes.append(im.size)
        if len(set(sizes)) != 1:
            raise ValueError(f"input images differ in size: {sizes}")
        object.__setattr__(self, "_sizes", tuple(sizes))

    @property
    def num_views(self) -> int:
        return len(self.images)

    @property
    def image_size(self) -> tuple[int, int]:
        """(width, height) shared by all input views."""
        return self._sizes[0]

    def load_images(self) -> list[np.ndarray]:
        """All views as (H, W, 3) uint8 arrays."""
        return [np.asarray(Image.open(p).convert("RGB")) for p in self.images]
