"""Numba kernels for tile compositing and nearest-ID snapping.

Tiles write disjoint output regions, so results are bit-identical for any
thread count. No fastmath: arithmetic must stay reproducible.
"""
from __future__ import annotations

import numpy as np
from numba import njit, prange

ALPHA_MAX = 0.99
ALPHA_SKIP = 1.0 / 255.0
T_EPS = 1e-4


@njit(cache=True)
def count_tile_spans(
    tx0, tx1, ty0, ty1, means2d, inv_cov, opacities, tiles_x,
    tile_size, width, height, counts, closed_at,
):
    """First binning pass: per-tile item counts, walking items in depth order.

    Also performs exact tile saturation culling: a running upper bound on the
    tile's transmittance (product of 1 - min-alpha-over-tile) proves, once it
    drops below T_EPS, that every pixel of the tile has already terminated --
    so deeper items are invisible there and can be dropped without changing
    the composited output. closed_at[t] records the last visible item index.
    """
    n = tx0.shape[0]
    closed_at[:] = n
    n_tiles = counts.shape[0]
    ubound = np.ones(n_tiles)
    for i in range(n):
        mx = means2d[i, 0]
        my = means2d[i, 1]
        ic0 = inv_cov[i, 0]
        ic1 = inv_cov[i, 1]
        ic2 = inv_cov[i, 2]
        op = opacities[i]
        for ty in range(ty0[i], ty1[i] + 1)            :
            base = ty * tiles_x
            py_lo = ty * tile_size + 0.5
            py_hi = min((ty + 1) * tile_size, height) - 0.5
            for tx in range(tx0[i], tx1[i] + 1):
                t = base + tx
                if i > closed_at[t]:
                    continue
                counts[t] += 1
                px_lo = tx * tile_size + 0.5
                px_hi = min((tx + 1) * tile_size, width) - 0.5
                # the quadratic form is convex: its max over the tile's pixel
                # centers sits at one of the four corners
                qmax = 0.0
                for cx in (px_lo, px_hi):
                    dx = cx - mx
                    for cy in (py_lo, py_hi):
                        dy = cy - my
                        q = ic0 * dx * dx + 2.0 * ic1 * dx * dy + ic2 * dy * dy
                        if q > qmax:
                            qmax = q
                a_min = op * np.exp(-0.5 * qmax)
                if a_min > ALPHA_MAX:
                    a_min = ALPHA_MAX
                a_min *= 1.0 - 1e-9  # stay below the true per-pixel minimum
                # only credit splats certain to pass the per-pixel skip check
                if a_min >= ALPHA_SKIP * (1.0 + 1e-6):
                    ubound[t] *= 1.0 - a_min
                    if ubound[t] < T_EPS * (1.0 - 1e-6):
                        closed_at[t] = i


@njit(cache=True)
def scatter_tile_spans(tx0, tx1, ty0, ty1, tiles_x, cursor, closed_at, out):
    """Second binning pass: place item indices per tile, preserving the
    incoming (depth-sorted) order and honoring the saturation cutoffs from
    count_tile_spans. cursor is consumed; pass a copy of the start offsets."""
    for i in range(tx0.shape[0]):
        for ty in range(ty0[i], ty1[i] + 1):
            base = ty * tiles_x
            for tx in range(tx0[i], tx1[i] + 1):
                t = base + tx
                if i > closed_at[t]:
                    continue
                out[cursor[t]] = i
                cursor[t] += 1


@njit(cache=True, parallel=True)
def composite_tiles(
    tile_starts,  # (T+1,) int64 offsets into tile_items
    tile_items,  # (L,) int32 gaussian indices, depth-ordered within each tile
    means2d,  # (M, 2) f64
    inv_cov,  # (M, 3) f64: [icov00, icov01, icov11]
    opacities,  # (M,) f64
    colors,  # (M, 3) f64
    features,  # (M, 3) f64
    power_floor,  # (M,) f64: below this exponent alpha is certainly < 1/255
    tiles_x,
    tile_size,
    rgb,  # (H, W, 3) f64 out
    feat,  # (H, W, 3) f64 out
    alpha,  # (H, W) f64 out
):
    height, width = alpha.shape
    n_tiles = tile_starts.shape[0] - 1
    for t in prange(n_tiles):
        ty = t // tiles_x
        tx = t - ty * tiles_x
        x0 = tx * tile_size
        y0 = ty * tile_size
        x1 = min(x0 + tile_size, width)
        y1 = min(y0 + tile_size, height)
        start = tile_starts[t]
        end = tile_starts[t + 1]
        cnt = end - start
        # gather this tile's splats into contiguous scratch so the per-pixel
        # sweep below reads sequential memory instead of 100k-row gathers
        g_mx = np.empty(cnt)
        g_my = np.empty(cnt)
        g_ic0 = np.empty(cnt)
        g_ic1 = np.empty(cnt)
        g_ic2 = np.empty(cnt)
        g_op = np.empty(cnt)
        g_fl = np.empty(cnt)
        g_col = np.empty((cnt, 3))
        g_ft = np.empty((cnt, 3))
        for k in range(cnt):
            i = tile_items[start + k]
            g_mx[k] = means2d[i, 0]
            g_my[k] = means2d[i, 1]
            g_ic0[k] = inv_cov[i, 0]
            g_ic1[k] = inv_cov[i, 1]
            g_ic2[k] = inv_cov[i, 2]
            g_op[k] = opacities[i]
            g_fl[k] = power_floor[i]
            for c in range(3):
                g_col[k, c] = colors[i, c]
                g_ft[k, c] = features[i, c]
        for py in range(y0, y1):
            cy = py + 0.5
            for px in range(x0, x1):
                cx = px + 0.5
                trans = 1.0
                for k in range(cnt):
                    dx = cx - g_mx[k]
                    dy = cy - g_my[k]
                    power = -0.5 * (
                        g_ic0[k] * dx * dx
                        + 2.0 * g_ic1[k] * dx * dy
                        + g_ic2[k] * dy * dy
                    )
                    if power > 0.0:
                        continue
                    # exp-free reject: power below the floor means alpha is
                    # under the skip threshold by a margin wider than fp error
                    if power < g_fl[k]:
                        continue
                    a = g_op[k] * np.exp(power)
                    if a > ALPHA_MAX:
                        a = ALPHA_MAX
                    if a < ALPHA_SKIP:
                        continue
                    w = a * trans
                    rgb[py, px, 0] += g_col[k, 0] * w
                    rgb[py, px, 1] += g_col[k, 1] * w
                    rgb[py, px, 2] += g_col[k, 2] * w
                    feat[py, px, 0] += g_ft[k, 0] * w
                    feat[py, px, 1] += g_ft[k, 1] * w
                    feat[py, px, 2] += g_ft[k, 2] * w
                    trans *= 1.0 - a
                    if trans < T_EPS:
                        break
                alpha[py, px] = 1.0 - trans


@njit(cache=True, parallel=True)
def snap_pixels(features, candidates, out):
    """Nearest candidate by L1 distance per pixel.

    features: (P, 3), candidates: (C, 3) ordered so that ties resolve to the
    lowest index (labels ascending, background last). out: (P,) int32.
    """
    n_pix = features.shape[0]
    n_cand = candidates.shape[0]
    for p in prange(n_pix):
        f0 = features[p, 0]
        f1 = features[p, 1]
        f2 = features[p, 2]
        best = 0
        best_d = (
            abs(f0 - candidates[0, 0])
            + abs(f1 - candidates[0, 1])
            + abs(f2 - candidates[0, 2])
        )
        for c in range(1, n_cand):
            d = (
                abs(f0 - candidates[c, 0])
                + abs(f1 - candidates[c, 1])
                + abs(f2 - candidates[c, 2])
            )
            if d < best_d:
                best_d = d
                best = c
        out[p] = best


@njit(cache=True, inline="always")
def _snap_one_grid(f0, f1, f2, candidates, cell_map):
    """L1-nearest candidate via expanding lattice-shell search.

    Exact: distances use the stored candidate coordinates (identical
    arithmetic to the brute-force kernel) and the search only stops once the
    current best strictly beats the geometric lower bound of every unchecked
    cell, so ties still resolve to the lowest candidate index.
    """
    m = cell_map.shape[0]
    inv_h = m - 1.0
    h = 1.0 / inv_h
    bg = candidates.shape[0] - 1
    best = bg
    best_d = (
        abs(f0 - candidates[bg, 0])
        + abs(f1 - candidates[bg, 1])
        + abs(f2 - candidates[bg, 2])
    )
    u0 = f0 * inv_h
    u1 = f1 * inv_h
    u2 = f2 * inv_h
    c0 = min(max(int(round(u0)), 0), m - 1)
    c1 = min(max(int(round(u1)), 0), m - 1)
    c2 = min(max(int(round(u2)), 0), m - 1)
    e = max(abs(u0 - c0), max(abs(u1 - c1), abs(u2 - c2)))
    w = 0
    while True:
        g0_lo, g0_hi = max(c0 - w, 0), min(c0 + w, m - 1)
        g1_lo, g1_hi = max(c1 - w, 0), min(c1 + w, m - 1)
        g2_lo, g2_hi = max(c2 - w, 0), min(c2 + w, m - 1)
        for g0 in range(g0_lo, g0_hi + 1):
            a0 = abs(g0 - c0)
            for g1 in range(g1_lo, g1_hi + 1):
                a1 = abs(g1 - c1)
                for g2 in range(g2_lo, g2_hi + 1):
                    if max(a0, max(a1, abs(g2 - c2))) != w:
                        continue  # interior cells were checked at smaller w
                    idx = cell_map[g0, g1, g2]
                    if idx < 0:
                        continue
                    d = (
                        abs(f0 - candidates[idx, 0])
                        + abs(f1 - candidates[idx, 1])
                        + abs(f2 - candidates[idx, 2])
                    )
                    if d < best_d or (d == best_d and idx < best):
                        best_d = d
                        best = idx
        # any unchecked cell is at least (w + 1 - e) grid steps away on some
        # axis; the margin keeps the stop strictly conservative under fp error
        if best_d < (w + 1 - e) * h - 1e-9:
            break
        if g0_lo == 0 and g0_hi == m - 1 and g1_lo == 0 and g1_hi == m - 1 and g2_lo == 0 and g2_hi == m - 1:
            break
        w += 1
    return best, best_d


@njit(cache=True, parallel=True)
def snap_pixels_grid(features, candidates, cell_map, out):
    """snap_pixels accelerated by bucketing candidates into their lattice
    cells (cell_map: (m, m, m) candidate index or -1; background is the last
    candidate row). Produces identical output to snap_pixels."""
    for p in prange(features.shape[0]):
        best, _ = _snap_one_grid(
            features[p, 0], features[p, 1], features[p, 2], candidates, cell_map
        )
        out[p] = best


@njit(cache=True, parallel=True)
def snap_pixels_grid_dist(features, candidates, cell_map, out, out_dist):
    """snap_pixels_grid variant that also records the winning L1 distance."""
    for p in prange(features.shape[0]):
        best, best_d = _snap_one_grid(
            features[p, 0], features[p, 1], features[p, 2], candidates, cell_map
        )
        out[p] = best
        out_dist[p] = best_d


@njit(cache=True, parallel=True)
def snap_pixels_dist(features, candidates, out, out_dist):
    """snap_pixels variant that also records the winning L1 distance."""
    n_pix = features.shape[0]
    n_cand = candidates.shape[0]
    for p in prange(n_pix):
        f0 = features[p, 0]
        f1 = features[p, 1]
        f2 = features[p, 2]
        best = 0
        best_d = (
            abs(f0 - candidates[0, 0])
            + abs(f1 - candidates[0, 1])
            + abs(f2 - candidates[0, 2])
        )
        for c in range(1, n_cand):
            d = (
                abs(f0 - candidates[c, 0])
                + abs(f1 - candidates[c, 1])
                + abs(f2 - candidates[c, 2])
            )
            if d < best_d:
                best_d = d
                best = c
        out[p] = best
        out_dist[p] = best_d
