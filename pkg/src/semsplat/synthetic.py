"""Synthetic scene builders for tests, benchmarks, and the demo CLI.

The layered-rectangles scene is fully analytic: every camera ray either hits
one of the axis-aligned object rectangles or the backdrop plane behind them,
so ground-truth label maps exist for any axis-aligned camera.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scene import (
    BACKGROUND_FEATURE,
    GaussianCloud,
    LabelMap,
    PinholeCamera,
)

# projected splat stddev in pixels; small enough that object edges stay
# sub-pixel sharp after the 0.3 px^2 anti-aliasing floor
SIGMA_PX = 0.3


def axis_camera(
    position, fx=120.0, fy=120.0, width=96, height=96, cx=None, cy=None
) -> PinholeCamera:
    """Camera at `position` looking down +z with identity rotation."""
    w2c = np.eye(4)
    w2c[:3, 3] = -np.asarray(position, dtype=np.float64)
    return PinholeCamera(
        fx=fx,
        fy=fy,
        cx=cx if cx is not None else width / 2,
        cy=cy if cy is not None else height / 2,
        width=width,
        height=height,
        world_to_camera=w2c,
    )


@dataclass(frozen=True)
class RectObject:
    """Axis-aligned rectangle at fixed depth, fronto-parallel to +z cameras."""

    x0: float
    x1: float
    y0: float
    y1: float
    z: float
    label: int  # tracker-namespace label (not necessarily contiguous)
    color: tuple[float, float, float]


@dataclass(frozen=True)
class LayeredScene:
    objects: tuple[RectObject, ...]
    plane_z: float
    plane_color: tuple[float, float, float]

    def ray_hits(self, cam: PinholeCamera) -> tuple[np.ndarray, np.ndarray]:
        """Per-pixel (depth, label) for an identity-rotation camera."""
        pos = -cam.world_to_camera[:3, 3]
        xs = (np.arange(cam.width) + 0.5 - cam.cx) / cam.fx
        ys = (np.arange(cam.height) + 0.5 - cam.cy) / cam.fy
        u, v = np.meshgrid(xs, ys)
        depth = np.full(u.shape, self.plane_z)
        label = np.zeros(u.shape, dtype=np.uint16)
        for obj in sorted(self.objects, key=lambda o: o.z):
            wx = pos[0] + u * obj.z
            wy = pos[1] + v * obj.z
            hit = (
                (label == 0)
                & (depth == self.plane_z)
                & (wx >= obj.x0)
                & (wx <= obj.x1)
                & (wy >= obj.y0)
                & (wy <= obj.y1)
            )
            depth[hit] = obj.z
            label[hit] = obj.label
        return depth, label

    def truth_label_map(self, cam: PinholeCamera) -> LabelMap:
        return LabelMap(self.ray_hits(cam)[1])

    def pixel_aligned_cloud(self, cameras: list[PinholeCamera]) -> GaussianCloud:
        """One Gaussian per input-view pixel (view-major, row-major), placed at
        the analytic surface hit. Features start at the background sentinel and
        are meant to be overwritten by the assignment step."""
        means, scales, colors = [], [], []
        color_of = {obj.label: obj.color for obj in self.objects}
        for cam in cameras:
            pos = -cam.world_to_camera[:3, 3]
            depth, label = self.ray_hits(cam)
            xs = (np.arange(cam.width) + 0.5 - cam.cx) / cam.fx
            ys = (np.arange(cam.height) + 0.5 - cam.cy) / cam.fy
            u, v = np.meshgrid(xs, ys)
            d = depth.ravel()
            means.append(
                np.stack([pos[0] + u.ravel() * d, pos[1] + v.ravel() * d, pos[2] + d], axis=1)
            )
            sigma = SIGMA_PX * d / cam.fx
            scales.append(np.stack([sigma, sigma, np.full_like(sigma, 1e-3)], axis=1))
            col = np.array(
                [color_of.get(int(l), self.plane_color) for l in label.ravel()]
            )
            colors.append(col)
        n = sum(len(m) for m in means)
        rot = np.zeros((n, 4))
        rot[:, 0] = 1.0
        return GaussianCloud(
            means=np.concatenate(means),
            scales=np.concatenate(scales),
            rotations=rot,
            opacities=np.full(n, 0.99),
            colors=np.concatenate(colors),
            features=np.tile(BACKGROUND_FEATURE, (n, 1)),
        )


def three_object_scene() -> LayeredScene:
    """Three disjoint rectangles over a backdrop plane; tracker labels are
    deliberately non-contiguous to exercise label compaction."""
    return LayeredScene(
        objects=(
            RectObject(-1.8, -0.7, -1.6, -0.3, 5.0, label=7, color=(0.9, 0.2, 0.2)),
            RectObject(0.5, 1.7, -1.5, -0.2, 5.0, label=3, color=(0.2, 0.8, 0.3)),
            RectObject(-0.7, 0.8, 0.5, 1.7, 5.0, label=12, color=(0.2, 0.3, 0.9)),
        ),
        plane_z=10.0,
        plane_color=(0.6, 0.6, 0.6),
    )


def random_cloud(
    n: int, cam: PinholeCamera, rng: np.random.Generator, feature_low: float = 0.0
) -> GaussianCloud:
    """Random Gaussians scattered inside the camera frustum."""
    depth = rng.uniform(2.0, 8.0, n)
    px = rng.uniform(0, cam.width, n)
    py = rng.uniform(0, cam.height, n)
    x_cam = (px - cam.cx) / cam.fx * depth
    y_cam = (py - cam.cy) / cam.fy * depth
    cam_pts = np.stack([x_cam, y_cam, depth], axis=1)
    R = cam.rotation
    means = (cam_pts - cam.translation) @ R
    q = rng.standard_normal((n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    return GaussianCloud(
        means=means,
        scales=rng.uniform(0.02, 0.25, (n, 3)),
        rotations=q,
        opacities=rng.uniform(0.05, 1.0, n),
        colors=rng.uniform(0, 1, (n, 3)),
        features=rng.uniform(feature_low, 1.0, (n, 3)),
    )


def random_camera(rng: np.random.Generator, width=64, height=64) -> PinholeCamera:
    """Random pose; the frustum is whatever random_cloud fills afterwards."""
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    R = np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )
    w2c = np.eye(4)
    w2c[:3, :3] = R
    w2c[:3, 3] = rng.uniform(-1, 1, 3)
    return PinholeCamera(
        fx=rng.uniform(40, 120),
        fy=rng.uniform(40, 120),
        cx=width / 2 + rng.uniform(-4, 4),
        cy=height / 2 + rng.uniform(-4, 4),
        width=width,
        height=height,
        world_to_camera=w2c,
    )


def smooth_image(width: int, height: int) -> np.ndarray:
    """Band-limited RGB test pattern in [0,1]; smooth enough that splat
    cross-talk between neighboring pixels stays negligible."""
    x = np.linspace(0, 1, width)
    y = np.linspace(0, 1, height)
    u, v = np.meshgrid(x, y)
    return np.clip(
        np.stack(
            [
                0.5 + 0.4 * np.sin(2 * np.pi * u),
                0.5 + 0.4 * np.cos(2 * np.pi * v),
                0.5 + 0.35 * np.sin(2 * np.pi * (u + v)),
            ],
            axis=2,
        ),
        0.0,
        1.0,
    )


def image_fit_cloud(image: np.ndarray, cam: PinholeCamera, depth: float = 5.0) -> GaussianCloud:
    """Pixel-aligned cloud whose render from `cam` reproduces `image`."""
    h, w = image.shape[:2]
    pos = -cam.world_to_camera[:3, 3]
    xs = (np.arange(w) + 0.5 - cam.cx) / cam.fx
    ys = (np.arange(h) + 0.5 - cam.cy) / cam.fy
    u, v = np.meshgrid(xs, ys)
    n = w * h
    means = np.stack(
        [pos[0] + u.ravel() * depth, pos[1] + v.ravel() * depth, np.full(n, pos[2] + depth)],
        axis=1,
    )
    sigma = SIGMA_PX * depth / cam.fx
    rot = np.zeros((n, 4))
    rot[:, 0] = 1.0
    return GaussianCloud(
        means=means,
        scales=np.full((n, 3), sigma),
        rotations=rot,
        opacities=np.full(n, 0.99),
        colors=image.reshape(-1, 3),
        features=np.full((n, 3), 0.5),
    )
