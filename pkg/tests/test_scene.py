import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semsplat.scene import (
    BACKGROUND_FEATURE,
    Embedding,
    FeatureMap,
    GaussianCloud,
    LabelMap,
    PinholeCamera,
    SemanticGaussian,
    covariance_of,
    quat_to_rotation,
    validate_scene,
)


def make_gaussian(**kwargs):
    defaults = dict(
        mean=(0.0, 0.0, 0.0),
        scale=(1.0, 1.0, 1.0),
        rotation=(1.0, 0.0, 0.0, 0.0),
        opacity=0.5,
        color=(0.5, 0.5, 0.5),
        feature=(0.1, 0.2, 0.3),
    )
    defaults.update(kwargs)
    return SemanticGaussian(**defaults)


unit_quats = st.tuples(
    *[st.floats(-1, 1, allow_nan=False) for _ in range(4)]
).filter(lambda q: sum(x * x for x in q) > 1e-4)


class TestSemanticGaussian:
    def test_quaternion_normalized_on_construction(self):
        g = make_gaussian(rotation=(2.0, 0.0, 0.0, 0.0))
        assert abs(np.linalg.norm(g.rotation) - 1.0) < 1e-6

    def test_zero_quaternion_rejected(self):
        with pytest.raises(ValueError):
            make_gaussian(rotation=(0.0, 0.0, 0.0, 0.0))

    @pytest.mark.parametrize("scale", [(0.0, 1, 1), (-1, 1, 1)])
    def test_nonpositive_scale_rejected(self, scale):
        with pytest.raises(ValueError):
            make_gaussian(scale=scale)

    @pytest.mark.parametrize("opacity", [-0.1, 1.5, float("nan")])
    def test_bad_opacity_rejected(self, opacity):
        with pytest.raises(ValueError):
            make_gaussian(opacity=opacity)

    def test_feature_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            make_gaussian(feature=(1.2, 0.0, 0.0))

    def test_background_sentinel_feature_allowed(self):
        g = make_gaussian(feature=BACKGROUND_FEATURE)
        assert np.array_equal(g.feature, BACKGROUND_FEATURE)


class TestCovarianceOf:
    def test_identity_rotation_unit_scale(self):
        g = make_gaussian()
        assert np.allclose(covariance_of(g), np.eye(3))

    def test_identity_rotation_diagonal(self):
        g = make_gaussian(scale=(2.0, 1.0, 1.0))
        assert np.allclose(covariance_of(g), np.diag([4.0, 1.0, 1.0]))

    def test_rotation_90deg_about_z(self):
        # R_z(90) maps x->y: diag(4,1,1) becomes diag(1,4,1)
        s = np.sqrt(0.5)
        g = make_gaussian(scale=(2.0, 1.0, 1.0), rotation=(s, 0.0, 0.0, s))
        assert np.allclose(covariance_of(g), np.diag([1.0, 4.0, 1.0]), atol=1e-12)

    @given(unit_quats)
    @settings(max_examples=100, deadline=None)
    def test_eigenvalues_bounded_by_scales(self, quat):
        g = make_gaussian(scale=(0.5, 1.0, 2.0), rotation=quat)
        eig = np.linalg.eigvalsh(covariance_of(g))
        assert eig.min() >= 0.25 - 1e-6
        assert eig.max() <= 4.0 + 1e-6

    @given(unit_quats, unit_quats)
    @settings(max_examples=50, deadline=None)
    def test_rotation_consistency(self, quat, extra):
        g = make_gaussian(scale=(0.5, 1.0, 2.0), rotation=quat)
        q = np.asarray(extra, dtype=np.float64)
        q /= np.linalg.norm(q)
        Q = quat_to_rotation(q)
        # quaternion composition (w,x,y,z): extra applied after g.rotation
        w1, x1, y1, z1 = q
        w2, x2, y2, z2 = g.rotation
        composed = (
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )
        rotated = make_gaussian(scale=(0.5, 1.0, 2.0), rotation=composed)
        assert np.allclose(covariance_of(rotated), Q @ covariance_of(g) @ Q.T, atol=1e-6)

    def test_symmetric_and_positive_definite(self):
        g = make_gaussian(scale=(0.1, 2.0, 0.7), rotation=(0.3, -0.2, 0.8, 0.1))
        cov = covariance_of(g)
        assert np.max(np.abs(cov - cov.T)) < 1e-7
        assert np.linalg.eigvalsh(cov).min() > 0


class TestValidateScene:
    def test_empty_ok(self):
        assert validate_scene([]) is None

    def test_single_valid_ok(self):
        assert validate_scene([make_gaussian()]) is None

    def test_bad_opacity_reports_index_and_field(self):
        cloud = GaussianCloud.from_list([make_gaussian()] * 4)
        cloud.opacities[3] = 1.5
        msg = validate_scene(cloud)
        assert msg is not None and "3" in msg and "opacity" in msg

    def test_nan_mean_reported(self):
        cloud = GaussianCloud.from_list([make_gaussian(), make_gaussian()])
        cloud.means[1, 0] = np.nan
        msg = validate_scene(cloud)
        assert msg is not None and "1" in msg and "mean" in msg

    def test_non_unit_quaternion_reported(self):
        cloud = GaussianCloud.from_list([make_gaussian()])
        cloud.rotations[0] = (2.0, 0.0, 0.0, 0.0)
        msg = validate_scene(cloud)
        assert msg is not None and "quaternion" in msg


class TestCamera:
    def test_valid_camera(self):
        cam = PinholeCamera(
            fx=100, fy=100, cx=50, cy=50, width=100, height=100, world_to_camera=np.eye(4)
        )
        assert np.allclose(cam.rotation, np.eye(3))

    def test_non_orthonormal_rotation_rejected(self):
        m = np.eye(4)
        m[0, 0] = 2.0
        with pytest.raises(ValueError):
            PinholeCamera(fx=100, fy=100, cx=50, cy=50, width=100, height=100, world_to_camera=m)

    def test_nonpositive_focal_rejected(self):
        with pytest.raises(ValueError):
            PinholeCamera(fx=0, fy=100, cx=50, cy=50, width=100, height=100, world_to_camera=np.eye(4))


class TestMaps:
    def test_label_map_rejects_large_labels(self):
        with pytest.raises(ValueError):
            LabelMap(np.full((2, 2), 70000, dtype=np.int64))

    def test_feature_map_rejects_nan(self):
        bad = np.zeros((2, 2, 3))
        bad[0, 0, 0] = np.nan
        with pytest.raises(ValueError):
            FeatureMap(bad)

    def test_embedding_sentinel_flag(self):
        assert Embedding(np.zeros(4)).is_sentinel
        assert not Embedding(np.array([0.0, 1.0, 0.0, 0.0])).is_sentinel

    def test_embedding_normalized(self):
        e = Embedding(np.array([3.0, 4.0])).normalized()
        assert abs(np.linalg.norm(e.values) - 1.0) < 1e-12


def test_cloud_roundtrip_to_gaussian():
    g = make_gaussian(mean=(1, 2, 3), feature=(0.9, 0.1, 0.4))
    cloud = GaussianCloud.from_list([g])
    back = cloud[0]
    assert np.allclose(back.mean, g.mean, atol=1e-6)
    assert np.allclose(back.feature, g.feature, atol=1e-6)
