import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from splatflow.core.types import Camera, GaussianCloud, VideoTensor, logit, sigmoid

from conftest import random_cloud


class TestActivations:
    @given(st.floats(min_value=-15.0, max_value=15.0))
    def test_logit_sigmoid_round_trip(self, x):
        # Optimizer-relevant raw range: |x| <= 15 keeps sigmoid away from
        # saturation, so the round trip must be tight.
        assert sigmoid(logit(sigmoid(x))) == pytest.approx(float(sigmoid(x)), abs=1e-6)
        assert float(logit(sigmoid(x))) == pytest.approx(x, abs=1e-6)

    @given(st.floats(min_value=-10.0, max_value=5.0))
    def test_log_exp_round_trip(self, x):
        assert float(np.log(np.exp(x))) == pytest.approx(x, abs=1e-6)

    def test_sigmoid_bounds(self):
        x = np.linspace(-40, 40, 401)
        s = sigmoid(x)
        assert (s >= 0).all() and (s <= 1).all()
        assert np.all(np.diff(s) >= 0)


class TestGaussianCloud:
    def test_activations_at_zero(self):
        cloud = GaussianCloud(
            positions=np.zeros((1, 3)),
            opacities_raw=[0.0],
            sh_coeffs=np.zeros((1, 4, 3)),
            scales_raw=np.zeros((1, 3)),
            rotations=[[1.0, 0.0, 0.0, 0.0]],
        )
        assert cloud.opacities()[0] == 0.5
        np.testing.assert_array_equal(cloud.scales()[0], [1.0, 1.0, 1.0])
        assert cloud.sh_degree == 1

    def test_opacity_scale_invariants(self):
        cloud = random_cloud(50, seed=3)
        assert ((cloud.opacities() > 0) & (cloud.opacities() < 1)).all()
        assert (cloud.scales() > 0).all()
        assert np.allclose(np.linalg.norm(cloud.unit_rotations(), axis=1), 1.0, atol=1e-12)

    def test_mismatched_lengths_rejected(self):
        with pytest.raises(ValueError):
            GaussianCloud(
                positions=np.zeros((2, 3)),
                opacities_raw=np.zeros(3),
                sh_coeffs=np.zeros((2, 4, 3)),
                scales_raw=np.zeros((2, 3)),
                rotations=np.tile([1.0, 0, 0, 0], (2, 1)),
            )

    def test_zero_quaternion_rejected(self):
        with pytest.raises(ValueError, match="quaternion"):
            GaussianCloud(
                positions=np.zeros((1, 3)),
                opacities_raw=[0.0],
                sh_coeffs=np.zeros((1, 4, 3)),
                scales_raw=np.zeros((1, 3)),
                rotations=[[0.0, 0.0, 0.0, 0.0]],
            )

    def test_bad_basis_size_rejected(self):
        with pytest.raises(ValueError, match="basis"):
            GaussianCloud(
                positions=np.zeros((1, 3)),
                opacities_raw=[0.0],
                sh_coeffs=np.zeros((1, 5, 3)),
                scales_raw=np.zeros((1, 3)),
                rotations=[[1.0, 0.0, 0.0, 0.0]],
            )


class TestCamera:
    def test_basic_properties(self):
        cam = Camera(K=[[50, 0, 16], [0, 60, 17], [0, 0, 1]], R=np.eye(3), t=[1, 2, 3],
                     width=32, height=32, near=0.1, far=10)
        assert (cam.fx, cam.fy, cam.cx, cam.cy) == (50, 60, 16, 17)
        np.testing.assert_allclose(cam.center(), [-1, -2, -3])

    def test_invalid_K_rejected(self):
        with pytest.raises(ValueError, match="upper-triangular"):
            Camera(K=[[50, 0, 16], [1, 50, 16], [0, 0, 1]], R=np.eye(3), t=np.zeros(3),
                   width=32, height=32)

    def test_nonrotation_rejected(self):
        with pytest.raises(ValueError, match="rotation"):
            Camera(K=[[50, 0, 16], [0, 50, 16], [0, 0, 1]], R=2 * np.eye(3), t=np.zeros(3),
                   width=32, height=32)

    def test_near_far_ordering(self):
        with pytest.raises(ValueError, match="near"):
            Camera(K=[[50, 0, 16], [0, 50, 16], [0, 0, 1]], R=np.eye(3), t=np.zeros(3),
                   width=32, height=32, near=5.0, far=1.0)

    def test_sees(self):
        cam = Camera(K=[[32, 0, 16], [0, 32, 16], [0, 0, 1]], R=np.eye(3), t=np.zeros(3),
                     width=32, height=32, near=0.1, far=10)
        pts = np.array([[0, 0, 2.0], [0, 0, -1.0], [100, 0, 2.0]])
        np.testing.assert_array_equal(cam.sees(pts), [True, False, False])


class TestVideoTensor:
    def test_requires_rank4(self):
        with pytest.raises(ValueError):
            VideoTensor(np.zeros((4, 4, 3)))

    def test_requires_frames(self):
        with pytest.raises(ValueError):
            VideoTensor(np.zeros((0, 4, 4, 3)))
