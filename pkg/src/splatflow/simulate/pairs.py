"""Paired (corrupted buffer video, clean video) sample construction.

A clean splat fit uses every capture; a corrupted fit sees only a sparse
view subset, fewer optimization steps, a possibly worse initialization,
and optionally the synthetic feed-forward degradation.  Both are
rendered along one interpolated trajectory through the retained
cameras.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..core.types import Camera, GaussianCloud, VideoTensor, logit
from ..optim.fit import FitConfig, fit
from ..raster.config import RasterConfig
from ..raster.render import GPVideo, render_gpbuffer, render_trajectory
from ..seeds import derive_seed
from ..traject.trajectory import TrajectoryConfig, interpolate
from .degrade import corrupt_feedforward, sparse_subset
from .scene import make_scene

INIT_MODES = ("points_from_scene", "random_points", "noisy_dense_points")
DEGRADE_MODES = ("none", "feedforward_synthetic")

# Paper-scale underfit step counts divided by the desk factor 10.
DESK_CORRUPT_ITERS = (300, 700, 3000)


@dataclass(frozen=True)
class SimConfig:
    retained_fraction: float = 0.05
    init_mode: str = "points_from_scene"
    corrupt_iters: int | None = None      # None: drawn from DESK_CORRUPT_ITERS
    clean_iters: int = 2000
    degrade_mode: str = "none"
    seed: int = 0
    # Desk-scale knobs (scene size, image size, trajectory density).
    n_splats: int | None = None
    n_frames: int | None = None
    width: int = 64
    height: int = 64
    samples_per_segment: int = 8
    raster: RasterConfig = field(default_factory=RasterConfig)

    def __post_init__(self):
        if not (0.0 < self.retained_fraction <= 1.0):
            raise ValueError(f"retained_fraction must be in (0, 1], got {self.retained_fraction}")
        if self.init_mode not in INIT_MODES:
            raise ValueError(f"init_mode must be one of {INIT_MODES}, got {self.init_mode!r}")
        if self.degrade_mode not in DEGRADE_MODES:
            raise ValueError(f"degrade_mode must be one of {DEGRADE_MODES}, got {self.degrade_mode!r}")
        if self.clean_iters < 1:
            raise ValueError("clean_iters must be >= 1")
        if self.degrade_mode == "none" and self.corrupt_iters is not None and self.corrupt_iters > self.clean_iters:
            raise ValueError("corrupt_iters must not exceed clean_iters when degrade_mode is none")


@dataclass(frozen=True)
class PairedSample:
    corrupted: GPVideo          # five-modality buffer video of the corrupted fit
    clean: VideoTensor          # color video of the clean fit, same trajectory
    cameras: list[Camera]
    meta: dict

    def __post_init__(self):
        t, h, w, _ = self.clean.shape
        if self.corrupted.color.shape[:3] != (t, h, w):
            raise ValueError("corrupted and clean videos must share T, H, W")
        if len(self.cameras) != t:
            raise ValueError(f"cameras length {len(self.cameras)} != frame count {t}")


def init_cloud(
    gt: GaussianCloud,
    mode: str,
    seed: int,
    sh_degree: int = 1,
) -> GaussianCloud:
    """Fresh optimization start: positions per mode, neutral appearance."""
    rng = np.random.default_rng(seed)
    extent = max(gt.extent(), 1e-9)
    n = gt.n
    if mode == "points_from_scene":
        positions = gt.positions + rng.normal(0.0, 0.01 * extent, (n, 3))
    elif mode == "noisy_dense_points":
        positions = gt.positions + rng.normal(0.0, 0.05 * extent, (n, 3))
    elif mode == "random_points":
        lo = gt.positions.min(axis=0)
        hi = gt.positions.max(axis=0)
        positions = rng.uniform(lo, hi, (n, 3))
    else:
        raise ValueError(f"unknown init mode {mode!r}")

    basis = (sh_degree + 1) ** 2
    sh = np.zeros((n, basis, 3))
    sh[:, 0, :] = rng.normal(0.0, 0.05, (n, 3))
    rot = np.zeros((n, 4))
    rot[:, 0] = 1.0
    return GaussianCloud(
        positions=positions,
        opacities_raw=np.full(n, float(logit(0.1))),
        sh_coeffs=sh,
        scales_raw=np.full((n, 3), np.log(0.03 * extent)),
        rotations=rot,
    )


def _fit_cfg(sim: SimConfig, iters: int, seed: int) -> FitConfig:
    return FitConfig(iterations=iters, seed=seed, raster=sim.raster)


def render_captures(cloud: GaussianCloud, cams: list[Camera], cfg: RasterConfig) -> list[np.ndarray]:
    return [render_gpbuffer(cloud, cam, cfg).color for cam in cams]


def generate_pair(scene_seed: int, cfg: SimConfig) -> PairedSample:
    gt_cloud, cams = make_scene(
        scene_seed, n_splats=cfg.n_splats, n_frames=cfg.n_frames,
        width=cfg.width, height=cfg.height,
    )
    captures = render_captures(gt_cloud, cams, cfg.raster)
    views = list(zip(cams, captures))

    clean_init = init_cloud(gt_cloud, "points_from_scene", derive_seed(scene_seed, "clean_init"))
    clean_cloud = fit(clean_init, views, _fit_cfg(cfg, cfg.clean_iters, derive_seed(scene_seed, "clean_fit")))

    retained = sparse_subset(views, cfg.retained_fraction, derive_seed(scene_seed, "sparse"))
    corrupt_iters = cfg.corrupt_iters
    if corrupt_iters is None:
        draw = np.random.default_rng(derive_seed(scene_seed, "corrupt_iters"))
        corrupt_iters = int(draw.choice(DESK_CORRUPT_ITERS))

    corrupt_init = init_cloud(gt_cloud, cfg.init_mode, derive_seed(scene_seed, "corrupt_init"))
    corrupt_cloud = fit(corrupt_init, retained, _fit_cfg(cfg, corrupt_iters, derive_seed(scene_seed, "corrupt_fit")))
    if cfg.degrade_mode == "feedforward_synthetic":
        corrupt_cloud = corrupt_feedforward(corrupt_cloud, derive_seed(scene_seed, "feedforward"))

    traj = interpolate([c for c, _ in retained], TrajectoryConfig(samples_per_segment=cfg.samples_per_segment))
    corrupted_video = render_trajectory(corrupt_cloud, traj, cfg.raster)
    clean_video = render_trajectory(clean_cloud, traj, cfg.raster).color

    meta = {
        "scene_id": f"scene-{scene_seed}",
        "init_mode": cfg.init_mode,
        "retained_fraction": cfg.retained_fraction,
        "retained_frames": len(retained),
        "corrupt_iters": corrupt_iters,
        "clean_iters": cfg.clean_iters,
        "degrade_mode": cfg.degrade_mode,
        "seed": scene_seed,
        "n_splats": gt_cloud.n,
        "n_capture_frames": len(cams),
    }
    return PairedSample(corrupted=corrupted_video, clean=clean_video, cameras=traj, meta=meta)


def pair_config_with(cfg: SimConfig, **kwargs) -> SimConfig:
    return replace(cfg, **kwargs)
