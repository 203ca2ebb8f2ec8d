"""Cross-view label unification: per-pixel voting over replicated tracker
outputs, label compaction, and a consistency diagnostic."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .scene import LabelMap

DEFAULT_REPLICATES = 5


@dataclass(frozen=True)
class ReplicatedSequence:
    """V x K label maps sharing one tracker-assigned label namespace."""

    maps: tuple[tuple[LabelMap, ...], ...]  # [view][replicate]

    def __post_init__(self):
        if not self.maps or not all(self.maps):
            raise ValueError("need at least one view with one replicate")
        k = len(self.maps[0])
        shape = self.maps[0][0].labels.shape
        for view in self.maps:
            if len(view) != k:
                raise ValueError("all views must have the same replicate count")
            for m in view:
                if m.labels.shape != shape:
                    raise ValueError("all label maps must share one resolution")
        object.__setattr__(self, "maps", tuple(tuple(v) for v in self.maps))

    @property
    def num_views(self) -> int:
        return len(self.maps)

    @property
    def num_replicates(self) -> int:
        return len(self.maps[0])


def vote(seq: ReplicatedSequence) -> list[LabelMap]:
    """Per-pixel mode over the K replicates of each view; ties go to the
    smallest label value."""
    out = []
    for view in seq.maps:
        stack = np.stack([m.labels for m in view])  # (K, H, W)
        mode = stats.mode(stack, axis=0, keepdims=False).mode
        out.append(LabelMap(mode.astype(np.uint16)))
    return out


def compact_labels(maps: list[LabelMap]) -> tuple[list[LabelMap], dict[int, int]]:
    """Renumber used labels to contiguous 1..N in first-appearance order
    (view-major, row-major); 0 stays 0."""
    table: dict[int, int] = {0: 0}
    for m in maps:
        flat = m.labels.ravel()
        uniq, first = np.unique(flat, return_index=True)
        for label in uniq[np.argsort(first, kind="stable")]:
            label = int(label)
            if label not in table:
                table[label] = len(table)
    lut = np.zeros(65536, dtype=np.uint16)
    for old, new in table.items():
        lut[old] = new
    remapped = [LabelMap(lut[m.labels]) for m in maps]
    del table[0]
    return remapped, table


def consistency_report(maps: list[LabelMap]) -> dict[int, list[int]]:
    """Per-label pixel counts per view (presence = count > 0); label 0 excluded."""
    counts = [np.bincount(m.labels.ravel(), minlength=65536) for m in maps]
    labels = sorted(
        set(int(x) for c in counts for x in np.flatnonzero(c)) - {0}
    )
    return {label: [int(c[label]) for c in counts] for label in labels}
