"""View subsampling and feed-forward-style cloud degradation."""

from __future__ import annotations

import math

import numpy as np

from ..core.types import GaussianCloud, logit, sigmoid


def sparse_subset(frames: list, fraction: float, seed: int) -> list:
    """Seeded random retention of max(2, ceil(fraction * N)) frames.

    The first and last frames are always kept so interpolated
    trajectories anchor at the real capture endpoints; relative order is
    preserved.
    """
    if not (0.0 < fraction <= 1.0):
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    n = len(frames)
    if n < 2:
        raise ValueError(f"need at least 2 frames, got {n}")
    k = max(2, math.ceil(fraction * n))
    rng = np.random.default_rng(seed)
    middle = rng.choice(np.arange(1, n - 1), size=min(k - 2, n - 2), replace=False)
    keep = sorted({0, n - 1, *middle.tolist()})
    return [frames[i] for i in keep]


def corrupt_feedforward(cloud: GaussianCloud, seed: int) -> GaussianCloud:
    """Synthetic stand-in for feed-forward reconstruction artifacts.

    Applies, with seeded randomness: a global opacity scale in [0.4, 0.8]
    (semi-transparent splats), per-voxel-cluster position offsets with
    sigma = 2% of scene extent (geometric inconsistency), a global color
    shift of at most 0.05 per channel, and a 4x elongation of 5% of the
    splats along a random axis (spiky primitives).  This is an explicit
    approximation of real feed-forward failure modes, flagged as such in
    sample metadata.
    """
    rng = np.random.default_rng(seed)
    extent = max(cloud.extent(), 1e-9)

    opacity_scale = rng.uniform(0.4, 0.8)
    new_opac = logit(np.clip(opacity_scale * sigmoid(cloud.opacities_raw), 1e-6, 1.0 - 1e-6))

    # Coarse voxel buckets stand in for reconstruction clusters.
    voxel = extent / 3.0
    keys = np.floor(cloud.positions / voxel).astype(np.int64)
    _, inverse = np.unique(keys, axis=0, return_inverse=True)
    n_buckets = int(inverse.max()) + 1 if cloud.n else 0
    offsets = rng.normal(0.0, 0.02 * extent, (n_buckets, 3))
    new_pos = cloud.positions + offsets[inverse]

    shift = rng.uniform(-0.05, 0.05, 3)
    new_sh = cloud.sh_coeffs.copy()
    new_sh[:, 0, :] += shift / 0.28209479177387814

    new_scales = cloud.scales_raw.copy()
    n_spiky = math.ceil(0.05 * cloud.n)
    spiky = rng.choice(cloud.n, size=n_spiky, replace=False)
    axes = rng.integers(0, 3, n_spiky)
    new_scales[spiky, axes] += np.log(4.0)

    return GaussianCloud(
        positions=new_pos,
        opacities_raw=new_opac,
        sh_coeffs=new_sh,
        scales_raw=new_scales,
        rotations=cloud.rotations,
    )
