"""Pure-numpy fallbacks for the hot kernels, same semantics as the numba path."""
from __future__ import annotations

import numpy as np

ALPHA_MAX = 0.99
ALPHA_SKIP = 1.0 / 255.0
T_EPS = 1e-4


def composite_tiles(
    tile_starts,
    tile_items,
    means2d,
    inv_cov,
    opacities,
    colors,
    features,
    power_floor,  # accepted for kernel-signature parity; the exact skip
    tiles_x,  # check below already zeroes everything the floor would reject
    tile_size,
    rgb,
    feat,
    alpha,
):
    height, width = alpha.shape
    n_tiles = tile_starts.shape[0] - 1
    for t in range(n_tiles):
        start, end = tile_starts[t], tile_starts[t + 1]
        ty, tx = divmod(t, tiles_x)
        x0, y0 = tx * tile_size, ty * tile_size
        x1, y1 = min(x0 + tile_size, width), min(y0 + tile_size, height)
        if x1 <= x0 or y1 <= y0:
            continue
        cxs = np.arange(x0, x1) + 0.5
        cys = np.arange(y0, y1) + 0.5
        dx_grid, dy_grid = np.meshgrid(cxs, cys)
        trans = np.ones((y1 - y0, x1 - x0))
        tile_rgb = np.zeros((y1 - y0, x1 - x0, 3))
        tile_feat = np.zeros((y1 - y0, x1 - x0, 3))
        for k in range(start, end):
            i = tile_items[k]
            dx = dx_grid - means2d[i, 0]
            dy = dy_grid - means2d[i, 1]
            power = -0.5 * (
                inv_cov[i, 0] * dx * dx + 2.0 * inv_cov[i, 1] * dx * dy + inv_cov[i, 2] * dy * dy
            )
            a = np.minimum(opacities[i] * np.exp(np.minimum(power, 0.0)), ALPHA_MAX)
            a[power > 0.0] = 0.0
            a[a < ALPHA_SKIP] = 0.0
            # per-pixel early termination: saturated pixels stop accumulating
            active = trans >= T_EPS
            w = np.where(active, a * trans, 0.0)
            tile_rgb += colors[i] * w[:, :, None]
            tile_feat += features[i] * w[:, :, None]
            trans = np.where(active, trans * (1.0 - a), trans)
            if not active.any():
                break
        rgb[y0:y1, x0:x1] = tile_rgb
        feat[y0:y1, x0:x1] = tile_feat
        alpha[y0:y1, x0:x1] = 1.0 - trans


def snap_pixels(features, candidates, out):
    dists = np.abs(features[:, None, :] - candidates[None, :, :]).sum(axis=2)
    out[:] = np.argmin(dists, axis=1)


def snap_pixels_dist(features, candidates, out, out_dist):
    dists = np.abs(features[:, None, :] - candidates[None, :, :]).sum(axis=2)
    out[:] = np.argmin(dists, axis=1)
    out_dist[:] = dists[np.arange(dists.shape[0]), out]
