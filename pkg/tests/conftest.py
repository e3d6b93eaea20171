from __future__ import annotations

import numpy as np
import pytest

from splatflow.core.types import Camera, GaussianCloud


def random_cloud(
    n: int,
    seed: int = 0,
    center=(0.0, 0.0, 3.0),
    spread: float = 0.5,
    scale_range=(0.05, 0.25),
    opacity_raw_range=(-2.0, 1.5),
    basis: int = 4,
) -> GaussianCloud:
    rng = np.random.default_rng(seed)
    q = rng.normal(0.0, 1.0, (n, 4))
    return GaussianCloud(
        positions=rng.normal(0.0, spread, (n, 3)) + np.asarray(center),
        opacities_raw=rng.uniform(*opacity_raw_range, n),
        sh_coeffs=rng.normal(0.0, 0.25, (n, basis, 3)),
        scales_raw=np.log(rng.uniform(*scale_range, (n, 3))),
        rotations=q / np.linalg.norm(q, axis=1, keepdims=True),
    )


def simple_camera(
    width: int = 64,
    height: int = 64,
    f: float | None = None,
    near: float = 0.1,
    far: float = 100.0,
) -> Camera:
    f = f if f is not None else 1.25 * width
    return Camera(
        K=[[f, 0.0, width / 2.0], [0.0, f, height / 2.0], [0.0, 0.0, 1.0]],
        R=np.eye(3),
        t=np.zeros(3),
        width=width,
        height=height,
        near=near,
        far=far,
    )


@pytest.fixture
def cam32() -> Camera:
    return simple_camera(32, 32, f=40.0)


@pytest.fixture
def cam64() -> Camera:
    return simple_camera(64, 64, f=80.0)
