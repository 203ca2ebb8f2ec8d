"""Perspective projection of 3D Gaussians to screen space.

The 2D covariance is the upper-left 2x2 block of J W Sigma W^T J^T with W the
world-to-camera rotation and J the perspective Jacobian at the camera-space
mean, plus a 0.3 px^2 isotropic anti-aliasing floor.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scene import GaussianCloud, PinholeCamera, SemanticGaussian, as_cloud, covariance_of

COV2D_FLOOR = 0.3  # px^2, keeps sub-pixel splats invertible
ALPHA_MAX = 0.99
ALPHA_SKIP = 1.0 / 255.0
DEFAULT_NEAR = 1e-3


@dataclass(frozen=True)
class ProjectedGaussian:
    """A splat on the image plane, ready for compositing."""

    mean2d: np.ndarray  # (2,) px
    cov2d: np.ndarray  # (2, 2) px^2, regularized
    depth: float  # camera-space z
    opacity: float
    color: np.ndarray
    feature: np.ndarray


def project(
    g: SemanticGaussian, cam: PinholeCamera, near: float = DEFAULT_NEAR
) -> ProjectedGaussian | None:
    """Project one Gaussian; returns None when culled by the near plane."""
    cloud = GaussianCloud.from_list([g])
    means2d, cov2d, depths, keep = project_cloud(cloud, cam, near)
    if not keep[0]:
        return None
    return ProjectedGaussian(
        mean2d=means2d[0],
        cov2d=cov2d[0],
        depth=float(depths[0]),
        opacity=g.opacity,
        color=g.color,
        feature=g.feature,
    )


def project_cloud(cloud, cam: PinholeCamera, near: float = DEFAULT_NEAR):
    """Vectorized projection of a whole cloud.

    Returns (means2d (N,2), cov2d (N,2,2), depths (N,), keep (N,) bool); entries
    where keep is False are culled and carry unspecified values.
    """
    cloud = as_cloud(cloud)
    n = len(cloud)
    if n == 0:
        return (
            np.zeros((0, 2)),
            np.zeros((0, 2, 2)),
            np.zeros(0),
            np.zeros(0, dtype=bool),
        )
    t = cam.to_camera(cloud.means.astype(np.float64))
    tz = t[:, 2]
    keep = tz > near

    tz_safe = np.where(keep, tz, 1.0)
    means2d = np.stack(
        [
            cam.fx * t[:, 0] / tz_safe + cam.cx,
            cam.fy * t[:, 1] / tz_safe + cam.cy,
        ],
        axis=1,
    )

    J = np.zeros((n, 2, 3))
    J[:, 0, 0] = cam.fx / tz_safe
    J[:, 0, 2] = -cam.fx * t[:, 0] / tz_safe**2
    J[:, 1, 1] = cam.fy / tz_safe
    J[:, 1, 2] = -cam.fy * t[:, 1] / tz_safe**2

    JW = J @ cam.rotation
    cov2d = JW @ cloud.covariances() @ np.transpose(JW, (0, 2, 1))
    cov2d = 0.5 * (cov2d + np.transpose(cov2d, (0, 2, 1)))
    cov2d[:, 0, 0] += COV2D_FLOOR
    cov2d[:, 1, 1] += COV2D_FLOOR
    return means2d, cov2d, tz, keep


def alpha_at(p: ProjectedGaussian, v: np.ndarray) -> float:
    """Opacity-weighted Gaussian falloff at pixel center v, with the standard
    0.99 clamp; values below 1/255 are treated as fully transparent."""
    d = np.asarray(v, dtype=np.float64) - p.mean2d
    cov = p.cov2d
    det = cov[0, 0] * cov[1, 1] - cov[0, 1] * cov[1, 0]
    power = -0.5 * (
        cov[1, 1] * d[0] * d[0] - (cov[0, 1] + cov[1, 0]) * d[0] * d[1] + cov[0, 0] * d[1] * d[1]
    ) / det
    a = min(p.opacity * np.exp(power), ALPHA_MAX)
    if a < ALPHA_SKIP:
        return 0.0
    return float(a)


def conservative_radii(cov2d: np.ndarray, opacities: np.ndarray) -> np.ndarray:
    """Screen-space radius outside which alpha is guaranteed below the 1/255
    skip threshold, from the larger eigenvalue of each 2D covariance."""
    a = cov2d[:, 0, 0]
    b = cov2d[:, 0, 1]
    c = cov2d[:, 1, 1]
    lam_max = 0.5 * (a + c) + np.sqrt(np.maximum(0.25 * (a - c) ** 2 + b * b, 0.0))
    o = np.minimum(np.asarray(opacities, dtype=np.float64), ALPHA_MAX)
    # alpha < 1/255 whenever r^2 > 2 ln(255 o) lam_max
    arg = np.maximum(np.log(np.maximum(o, 1e-12) * 255.0), 0.0)
    return np.sqrt(2.0 * arg * lam_max)


def conservative_extents(cov2d: np.ndarray, opacities: np.ndarray) -> np.ndarray:
    """Per-axis half-widths (N, 2) of the axis-aligned bounding box of each
    splat's 1/255-alpha level set.

    The level set d^T cov^-1 d = 2 ln(255 o) is an ellipse whose bounding box
    half-widths are sqrt(2 ln(255 o) cov_xx) and sqrt(2 ln(255 o) cov_yy);
    outside the box alpha is guaranteed below the skip threshold. Tighter than
    the circumscribed circle of conservative_radii for anisotropic splats."""
    o = np.minimum(np.asarray(opacities, dtype=np.float64), ALPHA_MAX)
    arg = np.maximum(np.log(np.maximum(o, 1e-12) * 255.0), 0.0)
    return np.sqrt(2.0 * arg[:, None] * cov2d[:, [0, 1], [0, 1]])
