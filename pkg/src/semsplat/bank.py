"""Multi-view language memory bank: lattice IDs in [0,1]^3 bound to per-view
high-dimensional embeddings, with L1 nearest-ID snapping."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels_numpy
from .backend import resolve_backend
from .scene import BACKGROUND_FEATURE, Embedding, FeatureMap, LabelMap

DEFAULT_DIM = 512
EMBED_NORM_TOL = 1e-5

# snap index reserved for the background candidate
BACKGROUND = -1


def lattice_points_per_axis(n: int) -> int:
    """ceil(cbrt(n)) without float cube-root rounding hazards."""
    m = 1
    while m * m * m < n:
        m += 1
    return m


def generate_ids(n: int, seed: int) -> np.ndarray:
    """Draw n distinct IDs from the evenly spaced lattice over [0,1]^3.

    The lattice has ceil(cbrt(n)) points per axis including both endpoints;
    selection is uniform without replacement and deterministic per (n, seed).
    """
    if n < 1:
        raise ValueError("need at least one ID")
    m = lattice_points_per_axis(n)
    if m == 1:
        return np.array([[0.5, 0.5, 0.5]])
    axis = np.arange(m) / (m - 1)
    gx, gy, gz = np.meshgrid(axis, axis, axis, indexing="ij")
    lattice = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    rng = np.random.default_rng(seed)
    pick = rng.choice(lattice.shape[0], size=n, replace=False)
    return lattice[pick]


@dataclass(frozen=True)
class BankEntry:
    label: int  # 1..N
    id: np.ndarray  # (3,) lattice point
    views: tuple[Embedding, ...]  # zero sentinel where the view lacks the object


@dataclass(frozen=True)
class MemoryBank:
    dim: int
    lattice_m: int
    seed: int
    entries: tuple[BankEntry, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        ids = self.ids()
        if len(self.entries) != len({e.label for e in self.entries}):
            raise ValueError("duplicate labels in bank")
        if [e.label for e in self.entries] != list(range(1, len(self.entries) + 1)):
            raise ValueError("labels must be contiguous 1..N")
        if len(self.entries) > 1:
            d = np.abs(ids[:, None, :] - ids[None, :, :]).sum(axis=2)
            np.fill_diagonal(d, np.inf)
            if self.lattice_m >= 2 and d.min() < 1.0 / (self.lattice_m - 1) - 1e-12:
                raise ValueError("IDs closer than the lattice spacing")
        for e in self.entries:
            for emb in e.views:
                if emb.dim != self.dim:
                    raise ValueError("embedding dimension mismatch")
                if not emb.is_sentinel and abs(np.linalg.norm(emb.values) - 1.0) > EMBED_NORM_TOL:
                    raise ValueError("stored embeddings must be unit-norm or zero")

    def ids(self) -> np.ndarray:
        return np.array([e.id for e in self.entries]).reshape(len(self.entries), 3)

    def __len__(self) -> int:
        return len(self.entries)


def build_bank(
    maps: list[LabelMap],
    embeddings: dict[tuple[int, int], Embedding],
    seed: int,
    dim: int = DEFAULT_DIM,
    num_views: int | None = None,
) -> MemoryBank:
    """Assemble the bank from compacted label maps and per-(view, label)
    embeddings; absent pairs become zero sentinels, everything else is
    L2-normalized on ingestion."""
    num_views = num_views if num_views is not None else len(maps)
    used = set()
    for m in maps:
        used.update(int(x) for x in np.unique(m.labels))
    used.discard(0)
    n = max(used) if used else 0
    if used and used != set(range(1, n + 1)):
        raise ValueError("label maps are not compacted to contiguous 1..N")
    for (view, label), emb in embeddings.items():
        if not 1 <= label <= n:
            raise ValueError(f"embedding for unknown label {label}")
        if not 0 <= view < num_views:
            raise ValueError(f"embedding for unknown view {view}")
        if emb.dim != dim:
            raise ValueError(
                f"embedding for (view {view}, label {label}) has dim {emb.dim}, expected {dim}"
            )
    if n == 0:
        raise ValueError("no labels present; nothing to build")
    ids = generate_ids(n, seed)
    sentinel = Embedding(np.zeros(dim))
    entries = []
    for label in range(1, n + 1):
        views = tuple(
            embeddings[(v, label)].normalized() if (v, label) in embeddings else sentinel
            for v in range(num_views)
        )
        entries.append(BankEntry(label=label, id=ids[label - 1], views=views))
    return MemoryBank(
        dim=dim, lattice_m=lattice_points_per_axis(n), seed=seed, entries=tuple(entries)
    )


def label_image(label_map: LabelMap, bank: MemoryBank) -> FeatureMap:
    """Replace each label with its lattice ID; label 0 gets the background
    sentinel vector."""
    max_label = int(label_map.labels.max())
    if max_label > len(bank):
        raise ValueError(f"label {max_label} not present in bank")
    lut = np.empty((len(bank) + 1, 3))
    lut[0] = BACKGROUND_FEATURE
    lut[1:] = bank.ids()
    return FeatureMap(lut[label_map.labels])


def _candidates(bank: MemoryBank) -> np.ndarray:
    # labels ascending, background candidate last: argmin tie-break then
    # matches "smallest label wins, background loses ties"
    return np.concatenate([bank.ids(), BACKGROUND_FEATURE[None, :]], axis=0)


def _on_lattice(bank: MemoryBank) -> bool:
    """True when every ID is within fp noise of a lattice point; the search
    margin in the grid kernel absorbs deviations this small."""
    k = bank.ids() * (bank.lattice_m - 1)
    return bool(np.abs(k - np.rint(k)).max() <= 1e-10)


def _cell_map(bank: MemoryBank) -> np.ndarray:
    """(m, m, m) lattice-cell -> candidate-index map (-1 for empty cells)."""
    m = bank.lattice_m
    cell_map = np.full((m, m, m), -1, dtype=np.int32)
    grid = np.rint(bank.ids() * (m - 1)).astype(np.int64)
    cell_map[grid[:, 0], grid[:, 1], grid[:, 2]] = np.arange(len(bank), dtype=np.int32)
    return cell_map


def snap(feature, bank: MemoryBank) -> BankEntry | None:
    """Entry whose ID is L1-nearest to the feature, or None for background."""
    if len(bank) == 0:
        raise ValueError("bank is empty")
    f = np.asarray(feature, dtype=np.float64)
    d = np.abs(_candidates(bank) - f).sum(axis=1)
    best = int(np.argmin(d))
    if best == len(bank):
        return None
    return bank.entries[best]


def snap_map(
    fm: FeatureMap,
    bank: MemoryBank,
    backend: str | None = None,
    reject_radius: float | None = None,
):
    """Pixelwise snap over a feature map.

    Returns (indices (H, W) int32 with -1 for background, unique_entries).
    reject_radius, when set, reassigns pixels whose winning L1 distance
    exceeds it to background (off by default).
    """
    if len(bank) == 0:
        raise ValueError("bank is empty")
    cands = _candidates(bank)
    flat = np.ascontiguousarray(fm.values.reshape(-1, 3))
    out = np.empty(flat.shape[0], dtype=np.int32)
    use_numba = resolve_backend(backend) == "numba"
    # lattice-bucketed search pays off once the candidate list is non-trivial;
    # it requires every ID to sit (within fp noise) on its lattice cell
    use_grid = use_numba and bank.lattice_m >= 2 and len(bank) > 8 and _on_lattice(bank)
    if use_numba:
        from . import _kernels_numba as kernels
    else:
        kernels = _kernels_numpy
    if use_grid:
        cell_map = _cell_map(bank)
        if reject_radius is None:
            kernels.snap_pixels_grid(flat, cands, cell_map, out)
        else:
            dist = np.empty(flat.shape[0])
            kernels.snap_pixels_grid_dist(flat, cands, cell_map, out, dist)
            out[dist > reject_radius] = len(bank)
    elif reject_radius is None:
        kernels.snap_pixels(flat, cands, out)
    else:
        dist = np.empty(flat.shape[0])
        kernels.snap_pixels_dist(flat, cands, out, dist)
        out[dist > reject_radius] = len(bank)
    out[out == len(bank)] = BACKGROUND
    indices = out.reshape(fm.values.shape[:2])
    unique = [bank.entries[i] for i in np.unique(out) if i != BACKGROUND]
    return indices, unique
