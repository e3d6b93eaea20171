"""Reconstruction updating: refine novel views, merge, re-optimize.

The refiner is injected as a callable so the loop is testable with an
oracle (ground-truth clean renders) independent of generator quality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from ..core.types import Camera, GaussianCloud, VideoTensor
from ..optim.fit import FitConfig, fit, merge_views
from ..raster.config import RasterConfig
from ..raster.render import GPVideo, render_trajectory
from ..refiner.model import RefinerModel
from ..refiner.refine import refine_video
from ..seeds import derive_seed
from ..traject.trajectory import TrajectoryConfig, interpolate


class VideoRefiner(Protocol):
    def __call__(self, corrupted: GPVideo, cams: list[Camera]) -> VideoTensor: ...


@dataclass(frozen=True)
class UpdateConfig:
    per_segment_samples: int = 4
    refine_ode_steps: int = 50
    update_iters: int = 1000
    seed: int = 0
    lambda_dssim: float = 0.2
    raster: RasterConfig = field(default_factory=RasterConfig)

    def __post_init__(self):
        if min(self.per_segment_samples, self.refine_ode_steps, self.update_iters) < 1:
            raise ValueError("all UpdateConfig counts must be >= 1")


class PipelineStageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage


class OracleRefiner:
    """Test-harness refiner: returns clean renders of a reference scene."""

    def __init__(self, reference_cloud: GaussianCloud, cfg: RasterConfig | None = None):
        self.reference_cloud = reference_cloud
        self.cfg = cfg or RasterConfig()

    def __call__(self, corrupted: GPVideo, cams: list[Camera]) -> VideoTensor:
        return render_trajectory(self.reference_cloud, cams, self.cfg).color


class ModelRefiner:
    """Trained-model refiner with fixed ODE steps and seed."""

    def __init__(self, model: RefinerModel, steps: int = 50, seed: int = 0):
        self.model = model
        self.steps = steps
        self.seed = seed

    def __call__(self, corrupted: GPVideo, cams: list[Camera]) -> VideoTensor:
        return refine_video(self.model, corrupted, steps=self.steps, seed=self.seed)


def reconstruct_update(
    cloud: GaussianCloud,
    input_views: list[tuple[Camera, np.ndarray]],
    refiner: VideoRefiner,
    cfg: UpdateConfig,
) -> GaussianCloud:
    """Densify the camera path, refine renders along it, merge with the
    inputs, and re-fit the cloud on the merged view set."""
    try:
        keys = [cam for cam, _ in input_views]
        path = interpolate(keys, TrajectoryConfig(samples_per_segment=cfg.per_segment_samples))
    except Exception as e:
        raise PipelineStageError("trajectory", e) from e

    try:
        buffers = render_trajectory(cloud, path, cfg.raster)
    except Exception as e:
        raise PipelineStageError("render", e) from e

    try:
        refined = refiner(buffers, path)
    except Exception as e:
        raise PipelineStageError("refine", e) from e
    if refined.frames.shape[0] != len(path):
        raise PipelineStageError(
            "refine", ValueError(f"refiner returned {refined.frames.shape[0]} frames for {len(path)} cameras")
        )

    try:
        refined_views = [(path[i], np.asarray(refined.frames[i], dtype=np.float64)) for i in range(len(path))]
        merged = merge_views(input_views, refined_views)
        fit_cfg = FitConfig(
            iterations=cfg.update_iters,
            lambda_dssim=cfg.lambda_dssim,
            seed=derive_seed(cfg.seed, "update_fit"),
            raster=cfg.raster,
        )
        return fit(cloud, merged, fit_cfg)
    except PipelineStageError:
        raise
    except Exception as e:
        raise PipelineStageError("fit", e) from e
