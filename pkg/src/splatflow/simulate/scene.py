"""Procedural splat scenes with orbit capture paths.

Desk-scale stand-in for real captures: a floor-plane cluster plus a few
object blobs, textured through low-degree SH, viewed by an orbiting
camera ring whose focal length is chosen so every capture contains the
whole scene (comfortably above the 50%-visibility contract).
"""

from __future__ import annotations

import numpy as np

from ..core.types import Camera, GaussianCloud, logit
from ..seeds import derive_seed
from ..traject.trajectory import PoseDecomposition, recompose


def make_scene(
    seed: int,
    n_splats: int | None = None,
    n_frames: int | None = None,
    width: int = 64,
    height: int = 64,
) -> tuple[GaussianCloud, list[Camera]]:
    rng = np.random.default_rng(derive_seed(seed, "make_scene"))
    n = int(n_splats) if n_splats is not None else int(rng.integers(100, 501))
    frames = int(n_frames) if n_frames is not None else int(rng.integers(40, 121))

    n_floor = max(8, int(0.4 * n))
    n_clusters = int(rng.integers(2, 5))
    n_obj = n - n_floor

    positions = np.empty((n, 3))
    scales_raw = np.empty((n, 3))
    rotations = np.zeros((n, 4))
    rotations[:, 0] = 1.0
    opacities_raw = logit(rng.uniform(0.65, 0.97, n))
    sh = np.zeros((n, 4, 3))

    # Floor: thin pancakes tiling y = 0.
    positions[:n_floor, 0] = rng.uniform(-2.0, 2.0, n_floor)
    positions[:n_floor, 1] = rng.normal(0.0, 0.01, n_floor)
    positions[:n_floor, 2] = rng.uniform(-2.0, 2.0, n_floor)
    scales_raw[:n_floor, 0] = np.log(rng.uniform(0.15, 0.35, n_floor))
    scales_raw[:n_floor, 1] = np.log(rng.uniform(0.02, 0.05, n_floor))
    scales_raw[:n_floor, 2] = np.log(rng.uniform(0.15, 0.35, n_floor))
    floor_base = rng.uniform(0.25, 0.75, 3)
    sh[:n_floor, 0, :] = (floor_base - 0.5) / 0.2821 + rng.normal(0.0, 0.35, (n_floor, 3))

    # Object clusters: roundish blobs above the floor.
    counts = np.full(n_clusters, n_obj // n_clusters)
    counts[: n_obj % n_clusters] += 1
    at = n_floor
    for c in range(n_clusters):
        k = int(counts[c])
        center = np.array([
            rng.uniform(-1.2, 1.2),
            rng.uniform(0.3, 1.2),
            rng.uniform(-1.2, 1.2),
        ])
        positions[at:at + k] = center + rng.normal(0.0, 0.25, (k, 3))
        scales_raw[at:at + k] = np.log(rng.uniform(0.05, 0.18, (k, 3)))
        q = rng.normal(0.0, 1.0, (k, 4))
        rotations[at:at + k] = q / np.linalg.norm(q, axis=1, keepdims=True)
        base = rng.uniform(0.15, 0.85, 3)
        sh[at:at + k, 0, :] = (base - 0.5) / 0.2821 + rng.normal(0.0, 0.3, (k, 3))
        at += k
    sh[:, 1:, :] = rng.normal(0.0, 0.08, (n, 3, 3))

    cloud = GaussianCloud(
        positions=positions,
        opacities_raw=opacities_raw,
        sh_coeffs=sh,
        scales_raw=scales_raw,
        rotations=rotations,
    )

    # Orbit ring around the splat centroid.
    target = positions.mean(axis=0)
    radius = rng.uniform(5.5, 6.5)
    cam_y = rng.uniform(2.0, 3.0)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    near, far = 0.2, 30.0

    centers = []
    for j in range(frames):
        ang = phase + 2.0 * np.pi * j / frames
        centers.append(np.array([
            target[0] + radius * np.cos(ang),
            cam_y,
            target[2] + radius * np.sin(ang),
        ]))

    # Focal length below the full-containment bound for every frame.
    f_req = np.inf
    half_w, half_h = width / 2.0 - 1.0, height / 2.0 - 1.0
    template = Camera(
        K=[[1.0, 0.0, width / 2.0], [0.0, 1.0, height / 2.0], [0.0, 0.0, 1.0]],
        R=np.eye(3), t=np.zeros(3), width=width, height=height, near=near, far=far,
    )
    poses = []
    for c in centers:
        cam = recompose(PoseDecomposition(position=c, look_at=target, up=np.array([0.0, 1.0, 0.0])), template)
        poses.append((cam.R, cam.t))
        pc = cam.world_to_cam(positions)
        z = pc[:, 2]
        fx_lim = half_w * z / np.maximum(np.abs(pc[:, 0]), 1e-9)
        fy_lim = half_h * z / np.maximum(np.abs(pc[:, 1]), 1e-9)
        f_req = min(f_req, float(fx_lim.min()), float(fy_lim.min()))
    f = float(np.clip(0.95 * f_req, 10.0, 200.0))

    K = np.array([[f, 0.0, width / 2.0], [0.0, f, height / 2.0], [0.0, 0.0, 1.0]])
    cams = [
        Camera(K=K, R=R, t=t, width=width, height=height, near=near, far=far)
        for R, t in poses
    ]
    for cam in cams:
        seen = cam.sees(positions).mean()
        if seen < 0.5:
            raise AssertionError(f"camera sees only {seen:.0%} of splats (seed {seed})")
    return cloud, cams
