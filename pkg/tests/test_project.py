"""Projection oracles.

The on-axis case has a closed form: for an isotropic world scale s at
depth z=1 under identity pose, J = diag(f, f) (columns 0..1), so
Sigma' = (f*s)^2 I plus the covariance floor, and the mean lands on the
principal point.
"""

import numpy as np
import pytest

from splatflow.core.types import GaussianCloud
from splatflow.raster.config import RasterConfig
from splatflow.raster.project import project_splats

from conftest import simple_camera


def _single_splat(pos, scale=0.1, opacity_raw=0.0):
    return GaussianCloud(
        positions=[pos],
        opacities_raw=[opacity_raw],
        sh_coeffs=np.zeros((1, 4, 3)),
        scales_raw=np.log(np.full((1, 3), scale)),
        rotations=[[1.0, 0.0, 0.0, 0.0]],
    )


class TestClosedForm:
    def test_on_axis_isotropic(self):
        f, s = 40.0, 0.1
        cam = simple_camera(32, 32, f=f, near=0.01)
        cfg = RasterConfig()
        (sp,) = project_splats(_single_splat([0.0, 0.0, 1.0], scale=s), cam, cfg)
        expected = (f * s) ** 2
        np.testing.assert_allclose(sp.mean2d, [cam.cx, cam.cy], atol=1e-12)
        assert sp.cov2d[0] == pytest.approx(expected + cfg.cov_floor, rel=1e-12)
        assert sp.cov2d[2] == pytest.approx(expected + cfg.cov_floor, rel=1e-12)
        assert sp.cov2d[1] == pytest.approx(0.0, abs=1e-12)
        assert sp.depth_cam == pytest.approx(1.0)

    def test_behind_camera_culled(self):
        cam = simple_camera(32, 32, f=40.0, near=0.01)
        assert project_splats(_single_splat([0.0, 0.0, -0.1]), cam) == []

    def test_beyond_far_culled(self):
        cam = simple_camera(32, 32, f=40.0, near=0.01, far=10.0)
        assert project_splats(_single_splat([0.0, 0.0, 50.0]), cam) == []

    def test_doubling_depth_quarters_cov(self):
        cam = simple_camera(32, 32, f=40.0, near=0.01)
        cfg = RasterConfig()
        (near_sp,) = project_splats(_single_splat([0.0, 0.0, 1.0]), cam, cfg)
        (far_sp,) = project_splats(_single_splat([0.0, 0.0, 2.0]), cam, cfg)
        for i in (0, 2):
            ratio = (far_sp.cov2d[i] - cfg.cov_floor) / (near_sp.cov2d[i] - cfg.cov_floor)
            assert ratio == pytest.approx(0.25, rel=1e-12)


class TestInvariants:
    def test_inverse_is_exact(self, cam32):
        from conftest import random_cloud

        cfg = RasterConfig()
        for sp in project_splats(random_cloud(30, seed=6), cam32, cfg):
            a, b, c = sp.cov2d
            ia, ib, ic = sp.inv_cov2d
            prod = np.array([[a, b], [b, c]]) @ np.array([[ia, ib], [ib, ic]])
            np.testing.assert_allclose(prod, np.eye(2), atol=1e-9)

    def test_radius_is_three_sigma_major(self, cam32):
        from conftest import random_cloud

        for sp in project_splats(random_cloud(20, seed=7), cam32, RasterConfig()):
            a, b, c = sp.cov2d
            lam_max = (a + c) / 2 + np.sqrt(((a - c) / 2) ** 2 + b * b)
            assert sp.radius_px == pytest.approx(3.0 * np.sqrt(lam_max), rel=1e-12)

    def test_sorted_near_to_far(self, cam32):
        from conftest import random_cloud

        splats = project_splats(random_cloud(40, seed=8), cam32, RasterConfig())
        depths = [sp.depth_cam for sp in splats]
        assert depths == sorted(depths)

    def test_empty_cloud_ok(self, cam32):
        empty = GaussianCloud(
            positions=np.zeros((0, 3)),
            opacities_raw=np.zeros(0),
            sh_coeffs=np.zeros((0, 4, 3)),
            scales_raw=np.zeros((0, 3)),
            rotations=np.zeros((0, 4)),
        )
        assert project_splats(empty, cam32) == []
