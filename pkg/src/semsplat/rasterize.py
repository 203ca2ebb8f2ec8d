"""Front-to-back alpha compositing of projected semantic Gaussians.

Two renderers with identical semantics: render_reference iterates every
projected Gaussian at every pixel (the correctness oracle) and render_tiled
bins Gaussians to tiles, composites per tile, and terminates early once
transmittance is negligible.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels_numpy
from .backend import resolve_backend
from .projection import (
    ALPHA_MAX,
    ALPHA_SKIP,
    DEFAULT_NEAR,
    conservative_extents,
    project_cloud,
)
from .scene import FeatureMap, PinholeCamera, as_cloud

DEFAULT_TILE_SIZE = 16
T_EPS = 1e-4


@dataclass(frozen=True)
class RenderOutput:
    rgb: FeatureMap
    feature: FeatureMap
    alpha: np.ndarray  # (H, W) accumulated opacity


def sort_by_depth(depths) -> np.ndarray:
    """Stable ascending-depth permutation (equal depths keep input order)."""
    return np.argsort(np.asarray(depths), kind="stable")


def _prepare(gaussians, cam: PinholeCamera, near: float):
    """Project, cull, and depth-sort; returns arrays in compositing order."""
    cloud = as_cloud(gaussians)
    means2d, cov2d, depths, keep = project_cloud(cloud, cam, near)
    idx = np.flatnonzero(keep)
    order = idx[sort_by_depth(depths[idx])]
    means2d = means2d[order]
    cov2d = cov2d[order]
    det = cov2d[:, 0, 0] * cov2d[:, 1, 1] - cov2d[:, 0, 1] * cov2d[:, 1, 0]
    inv_cov = np.stack(
        [cov2d[:, 1, 1] / det, -cov2d[:, 0, 1] / det, cov2d[:, 0, 0] / det], axis=1
    )
    opac = cloud.opacities.astype(np.float64)[order]
    colors = cloud.colors.astype(np.float64)[order]
    feats = cloud.features.astype(np.float64)[order]
    extents = conservative_extents(cov2d, opac)
    # alpha = opac * e^power < 1/255 iff power < log(1/(255 opac)); the margin
    # keeps the exp-free kernel reject strictly below the exact threshold
    power_floor = np.log(ALPHA_SKIP / np.maximum(opac, 1e-300)) - 1e-9
    return means2d, cov2d, inv_cov, opac, colors, feats, extents, power_floor


def render_reference(gaussians, cam: PinholeCamera, near: float = DEFAULT_NEAR) -> RenderOutput:
    """Oracle renderer: all Gaussians at all pixels, no tiling, no early exit."""
    means2d, cov2d, _inv, opac, colors, feats, _ext, _floor = _prepare(gaussians, cam, near)
    h, w = cam.height, cam.width
    cx = np.arange(w) + 0.5
    cy = np.arange(h) + 0.5
    px, py = np.meshgrid(cx, cy)
    rgb = np.zeros((h, w, 3))
    feat = np.zeros((h, w, 3))
    trans = np.ones((h, w))
    for i in range(means2d.shape[0]):
        inv = np.linalg.inv(cov2d[i])
        dx = px - means2d[i, 0]
        dy = py - means2d[i, 1]
        power = -0.5 * (inv[0, 0] * dx * dx + 2.0 * inv[0, 1] * dx * dy + inv[1, 1] * dy * dy)
        a = np.minimum(opac[i] * np.exp(np.minimum(power, 0.0)), ALPHA_MAX)
        a[power > 0.0] = 0.0
        a[a < ALPHA_SKIP] = 0.0
        w_i = a * trans
        rgb += colors[i] * w_i[:, :, None]
        feat += feats[i] * w_i[:, :, None]
        trans = trans * (1.0 - a)
    return RenderOutput(
        rgb=FeatureMap(rgb), feature=FeatureMap(feat), alpha=1.0 - trans
    )


def _bin_tiles(means2d, extents, width, height, tile_size, backend="numpy",
               inv_cov=None, opac=None):
    """Assign each Gaussian to the tiles its conservative bounding box touches.

    Returns (tile_starts, tile_items, tiles_x, tiles_y); items within a tile
    keep the incoming (depth-sorted) order. The numba path additionally drops
    items that are provably hidden behind a saturated tile (inv_cov and opac
    are required for that bound); the composited output is identical.
    """
    tiles_x = (width + tile_size - 1) // tile_size
    tiles_y = (height + tile_size - 1) // tile_size
    n = means2d.shape[0]
    if n == 0:
        return np.zeros(tiles_x * tiles_y + 1, dtype=np.int64), np.zeros(0, dtype=np.int32), tiles_x, tiles_y
    # pixel x covers centers [x+0.5]; pad by one pixel to stay conservative
    rx = extents[:, 0] + 1.0
    ry = extents[:, 1] + 1.0
    tx0 = np.clip(np.floor((means2d[:, 0] - rx) / tile_size).astype(np.int64), 0, tiles_x - 1)
    tx1 = np.clip(np.floor((means2d[:, 0] + rx) / tile_size).astype(np.int64), 0, tiles_x - 1)
    ty0 = np.clip(np.floor((means2d[:, 1] - ry) / tile_size).astype(np.int64), 0, tiles_y - 1)
    ty1 = np.clip(np.floor((means2d[:, 1] + ry) / tile_size).astype(np.int64), 0, tiles_y - 1)
    # fully off-screen splats (span clipped to a tile they do not touch) are
    # harmless: their alpha is below the skip threshold there by construction
    if backend == "numba" and inv_cov is not None and opac is not None:
        from . import _kernels_numba

        counts = np.zeros(tiles_x * tiles_y, dtype=np.int64)
        closed_at = np.empty(tiles_x * tiles_y, dtype=np.int64)
        _kernels_numba.count_tile_spans(
            tx0, tx1, ty0, ty1, means2d, inv_cov, opac, tiles_x,
            tile_size, width, height, counts, closed_at,
        )
        starts = np.zeros(tiles_x * tiles_y + 1, dtype=np.int64)
        np.cumsum(counts, out=starts[1:])
        tile_items = np.empty(int(starts[-1]), dtype=np.int32)
        _kernels_numba.scatter_tile_spans(
            tx0, tx1, ty0, ty1, tiles_x, starts[:-1].copy(), closed_at, tile_items
        )
        return starts, tile_items, tiles_x, tiles_y
    wx = tx1 - tx0 + 1
    wy = ty1 - ty0 + 1
    counts = wx * wy
    total = int(counts.sum())
    gauss_ids = np.repeat(np.arange(n, dtype=np.int32), counts)
    # per-duplicate offset within its span, row-major over the span
    offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    wx_rep = np.repeat(wx, counts)
    dy, dx = np.divmod(offsets, wx_rep)
    tile_ids = (np.repeat(ty0, counts) + dy) * tiles_x + np.repeat(tx0, counts) + dx
    starts = np.zeros(tiles_x * tiles_y + 1, dtype=np.int64)
    np.cumsum(np.bincount(tile_ids, minlength=tiles_x * tiles_y), out=starts[1:])
    order = np.argsort(tile_ids, kind="stable")
    tile_items = np.ascontiguousarray(gauss_ids[order])
    return starts, tile_items, tiles_x, tiles_y


def render_tiled(
    gaussians,
    cam: PinholeCamera,
    tile_size: int = DEFAULT_TILE_SIZE,
    near: float = DEFAULT_NEAR,
    backend: str | None = None,
) -> RenderOutput:
    """Fast path: tile binning + per-tile compositing with early termination.

    Matches render_reference within 1e-4 per channel.
    """
    if tile_size < 1:
        raise ValueError("tile_size must be >= 1")
    means2d, _cov2d, inv_cov, opac, colors, feats, extents, floor = _prepare(gaussians, cam, near)
    h, w = cam.height, cam.width
    resolved = resolve_backend(backend)
    starts, items, tiles_x, _tiles_y = _bin_tiles(
        means2d, extents, w, h, tile_size, backend=resolved, inv_cov=inv_cov, opac=opac
    )
    rgb = np.zeros((h, w, 3))
    feat = np.zeros((h, w, 3))
    alpha = np.zeros((h, w))
    if resolved == "numba":
        from . import _kernels_numba as kernels
    else:
        kernels = _kernels_numpy
    kernels.composite_tiles(
        starts, items, means2d, inv_cov, opac, colors, feats, floor,
        tiles_x, tile_size, rgb, feat, alpha,
    )
    return RenderOutput(rgb=FeatureMap(rgb), feature=FeatureMap(feat), alpha=alpha)
