"""Core domain types: Gaussians, cameras, label maps, feature maps, embeddings.

All types are immutable after construction and safe to share across threads.
Covariances are stored factored as (scale, rotation) so positive-definiteness
holds by construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Sentinel feature for explicitly unlabeled pixels. Lives outside [0,1]^3 so it
# can never collide with a lattice ID.
BACKGROUND_FEATURE = np.array([-1.0, -1.0, -1.0])

_QUAT_NORM_TOL = 1e-6
_ROT_ORTHO_TOL = 1e-5


def _as_vec(x, n, name):
    v = np.asarray(x, dtype=np.float64)
    if v.shape != (n,):
        raise ValueError(f"{name} must be a {n}-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite values")
    return v


def quat_to_rotation(q: np.ndarray) -> np.ndarray:
    """Rotation matrix from a unit quaternion in (w, x, y, z) order."""
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def _feature_ok(f: np.ndarray) -> bool:
    if np.all((f >= 0.0) & (f <= 1.0)):
        return True
    # unlabeled-pixel sentinel is the one value allowed outside [0,1]^3
    return bool(np.all(f == BACKGROUND_FEATURE))


@dataclass(frozen=True)
class SemanticGaussian:
    """One splat: geometry, appearance, and a 3-dim semantic feature."""

    mean: np.ndarray
    scale: np.ndarray
    rotation: np.ndarray  # quaternion (w, x, y, z), normalized on construction
    opacity: float
    color: np.ndarray
    feature: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", _as_vec(self.mean, 3, "mean"))
        scale = _as_vec(self.scale, 3, "scale")
        if np.any(scale <= 0):
            raise ValueError("scale components must be strictly positive")
        object.__setattr__(self, "scale", scale)
        q = _as_vec(self.rotation, 4, "rotation")
        norm = float(np.linalg.norm(q))
        if norm == 0.0:
            raise ValueError("rotation quaternion has zero norm")
        object.__setattr__(self, "rotation", q / norm)
        opacity = float(self.opacity)
        if not np.isfinite(opacity) or not 0.0 <= opacity <= 1.0:
            raise ValueError(f"opacity must be in [0,1], got {opacity}")
        object.__setattr__(self, "opacity", opacity)
        color = _as_vec(self.color, 3, "color")
        if np.any((color < 0) | (color > 1)):
            raise ValueError("color components must be in [0,1]")
        object.__setattr__(self, "color", color)
        feat = _as_vec(self.feature, 3, "feature")
        if not _feature_ok(feat):
            raise ValueError("feature must be in [0,1]^3 or the background sentinel")
        object.__setattr__(self, "feature", feat)


def covariance_of(g: SemanticGaussian) -> np.ndarray:
    """World-space covariance R diag(scale^2) R^T of one Gaussian."""
    R = quat_to_rotation(g.rotation)
    cov = (R * (g.scale**2)) @ R.T
    return 0.5 * (cov + cov.T)


@dataclass(frozen=True)
class PinholeCamera:
    """Intrinsics plus a rigid world-to-camera transform (row-major 4x4)."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    world_to_camera: np.ndarray

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be >= 1")
        m = np.asarray(self.world_to_camera, dtype=np.float64)
        if m.shape != (4, 4):
            raise ValueError("world_to_camera must be 4x4")
        if not np.all(np.isfinite(m)):
            raise ValueError("world_to_camera contains non-finite values")
        R = m[:3, :3]
        if np.max(np.abs(R @ R.T - np.eye(3))) > _ROT_ORTHO_TOL:
            raise ValueError("world_to_camera rotation block is not orthonormal")
        object.__setattr__(self, "world_to_camera", m)

    @property
    def rotation(self) -> np.ndarray:
        return self.world_to_camera[:3, :3]

    @property
    def translation(self) -> np.ndarray:
        return self.world_to_camera[:3, 3]

    def to_camera(self, points: np.ndarray) -> np.ndarray:
        """Transform world points (..., 3) into camera space."""
        return points @ self.rotation.T + self.translation


@dataclass(frozen=True)
class LabelMap:
    """Per-pixel object indices; 0 means unlabeled."""

    labels: np.ndarray  # (H, W) uint16

    def __post_init__(self):
        arr = np.asarray(self.labels)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("labels must be a non-empty 2D array")
        if np.issubdtype(arr.dtype, np.floating):
            raise ValueError("labels must be integral")
        if arr.min() < 0 or arr.max() >= 65536:
            raise ValueError("labels must fit in uint16")
        object.__setattr__(self, "labels", np.ascontiguousarray(arr, dtype=np.uint16))

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]


@dataclass(frozen=True)
class FeatureMap:
    """Per-pixel 3-vectors (rendered features or lattice-ID label images)."""

    values: np.ndarray  # (H, W, 3) float

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("values must have shape (H, W, 3) with positive H, W")
        if not np.all(np.isfinite(arr)):
            raise ValueError("feature map contains non-finite values")
        object.__setattr__(self, "values", np.ascontiguousarray(arr))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class Embedding:
    """A language embedding; the all-zero vector marks an absent view."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("embedding must be a non-empty 1D vector")
        if not np.all(np.isfinite(v)):
            raise ValueError("embedding contains non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.size

    @property
    def is_sentinel(self) -> bool:
        return not np.any(self.values)

    def normalized(self) -> "Embedding":
        n = float(np.linalg.norm(self.values))
        if n == 0.0:
            return self
        return Embedding(self.values / n)


class GaussianCloud:
    """Structure-of-arrays scene storage; float32 to match the file format."""

    __slots__ = ("means", "scales", "rotations", "opacities", "colors", "features")

    def __init__(self, means, scales, rotations, opacities, colors, features):
        n = len(means)
        self.means = np.ascontiguousarray(means, dtype=np.float32).reshape(n, 3)
        self.scales = np.ascontiguousarray(scales, dtype=np.float32).reshape(n, 3)
        self.rotations = np.ascontiguousarray(rotations, dtype=np.float32).reshape(n, 4)
        self.opacities = np.ascontiguousarray(opacities, dtype=np.float32).reshape(n)
        self.colors = np.ascontiguousarray(colors, dtype=np.float32).reshape(n, 3)
        self.features = np.ascontiguousarray(features, dtype=np.float32).reshape(n, 3)

    def __len__(self) -> int:
        return self.means.shape[0]

    @classmethod
    def empty(cls) -> "GaussianCloud":
        z = np.zeros((0, 3))
        return cls(z, z, np.zeros((0, 4)), np.zeros(0), z, z)

    @classmethod
    def from_list(cls, gaussians: list[SemanticGaussian]) -> "GaussianCloud":
        if not gaussians:
            return cls.empty()
        return cls(
            np.array([g.mean for g in gaussians]),
            np.array([g.scale for g in gaussians]),
            np.array([g.rotation for g in gaussians]),
            np.array([g.opacity for g in gaussians]),
            np.array([g.color for g in gaussians]),
            np.array([g.feature for g in gaussians]),
        )

    def __getitem__(self, i: int) -> SemanticGaussian:
        return SemanticGaussian(
            mean=self.means[i],
            scale=self.scales[i],
            rotation=self.rotations[i],
            opacity=float(self.opacities[i]),
            color=self.colors[i],
            feature=self.features[i],
        )

    def with_features(self, features: np.ndarray) -> "GaussianCloud":
        return GaussianCloud(
            self.means, self.scales, self.rotations, self.opacities, self.colors, features
        )

    def covariances(self) -> np.ndarray:
        """World-space 3x3 covariances for all Gaussians, shape (N, 3, 3)."""
        q = self.rotations.astype(np.float64)
        q = q / np.linalg.norm(q, axis=1, keepdims=True)
        w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
        R = np.empty((len(self), 3, 3))
        R[:, 0, 0] = 1 - 2 * (y * y + z * z)
        R[:, 0, 1] = 2 * (x * y - w * z)
        R[:, 0, 2] = 2 * (x * z + w * y)
        R[:, 1, 0] = 2 * (x * y + w * z)
        R[:, 1, 1] = 1 - 2 * (x * x + z * z)
        R[:, 1, 2] = 2 * (y * z - w * x)
        R[:, 2, 0] = 2 * (x * z - w * y)
        R[:, 2, 1] = 2 * (y * z + w * x)
        R[:, 2, 2] = 1 - 2 * (x * x + y * y)
        s2 = self.scales.astype(np.float64) ** 2
        M = R * s2[:, None, :]
        cov = M @ np.transpose(R, (0, 2, 1))
        return 0.5 * (cov + np.transpose(cov, (0, 2, 1)))


def as_cloud(gaussians) -> GaussianCloud:
    if isinstance(gaussians, GaussianCloud):
        return gaussians
    return GaussianCloud.from_list(list(gaussians))


def validate_scene(gaussians) -> str | None:
    """Check scene invariants; returns None when valid, else the first violation."""
    cloud = as_cloud(gaussians)
    for name, arr in (
        ("mean", cloud.means),
        ("scale", cloud.scales),
        ("rotation", cloud.rotations),
        ("opacity", cloud.opacities),
        ("color", cloud.colors),
        ("feature", cloud.features),
    ):
        bad = ~np.isfinite(arr)
        if bad.any():
            i = int(np.argwhere(bad)[0][0])
            return f"gaussian {i}: non-finite {name}"
    bad = np.any(cloud.scales <= 0, axis=1)
    if bad.any():
        return f"gaussian {int(np.argmax(bad))}: non-positive scale"
    norms = np.linalg.norm(cloud.rotations.astype(np.float64), axis=1)
    bad = np.abs(norms - 1.0) > _QUAT_NORM_TOL
    if bad.any():
        return f"gaussian {int(np.argmax(bad))}: quaternion norm {norms[np.argmax(bad)]:.6f} != 1"
    bad = (cloud.opacities < 0) | (cloud.opacities > 1)
    if bad.any():
        return f"gaussian {int(np.argmax(bad))}: opacity out of [0,1]"
    bad = np.any((cloud.colors < 0) | (cloud.colors > 1), axis=1)
    if bad.any():
        return f"gaussian {int(np.argmax(bad))}: color out of [0,1]"
    feats = cloud.features.astype(np.float64)
    in_range = np.all((feats >= 0) & (feats <= 1), axis=1)
    sentinel = np.all(feats == BACKGROUND_FEATURE, axis=1)
    bad = ~(in_range | sentinel)
    if bad.any():
        return f"gaussian {int(np.argmax(bad))}: feature out of [0,1]"
    return None
