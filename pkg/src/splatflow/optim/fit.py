"""Scene fitting: Adam over raw splat parameters, one view per step."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core.types import Camera, GaussianCloud
from ..raster.config import RasterConfig
from .adam import Adam
from .grad import render_color_backward, render_color_forward
from .losses import loss_terms


class FitDivergence(RuntimeError):
    def __init__(self, step: int, group: str, message: str):
        super().__init__(f"non-finite values at step {step} in {group}: {message}")
        self.step = step
        self.group = group


@dataclass(frozen=True)
class LearningRates:
    """Per-group step sizes.  positions is scaled by scene extent."""

    positions: float = 1.6e-4
    opacities_raw: float = 0.05
    sh_coeffs: float = 2.5e-3
    scales_raw: float = 5e-3
    rotations: float = 1e-3


@dataclass(frozen=True)
class FitConfig:
    iterations: int = 2000
    lambda_dssim: float = 0.2
    learning_rates: LearningRates = field(default_factory=LearningRates)
    adam_betas: tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-15
    ssim_window: int = 11
    ssim_sigma: float = 1.5
    seed: int = 0
    raster: RasterConfig = field(default_factory=RasterConfig)

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if not (0.0 <= self.lambda_dssim <= 1.0):
            raise ValueError(f"lambda must be in [0, 1], got {self.lambda_dssim}")
        if self.ssim_window % 2 != 1:
            raise ValueError("ssim_window must be odd")


def fit(
    cloud0: GaussianCloud,
    views: list[tuple[Camera, np.ndarray]],
    cfg: FitConfig,
    log: list | None = None,
) -> GaussianCloud:
    """Optimize the cloud against the views; returns the refined cloud.

    One random view per step (seeded shuffle, reshuffled per epoch);
    quaternions renormalized after each step.  If `log` is given, a
    (step, loss, l1, dssim) row is appended per step.
    """
    if not views:
        raise ValueError("need at least one view")
    if cloud0.n == 0:
        raise ValueError("cannot fit an empty cloud")
    for cam, img in views:
        if img.shape != (cam.height, cam.width, 3):
            raise ValueError(f"view image shape {img.shape} does not match camera {cam.width}x{cam.height}")

    params = {
        "positions": cloud0.positions.copy(),
        "opacities_raw": cloud0.opacities_raw.copy(),
        "sh_coeffs": cloud0.sh_coeffs.copy(),
        "scales_raw": cloud0.scales_raw.copy(),
        "rotations": cloud0.unit_rotations().copy(),
    }
    extent = max(cloud0.extent(), 1e-6)
    lr = cfg.learning_rates
    opt = Adam(
        {
            "positions": lr.positions * extent,
            "opacities_raw": lr.opacities_raw,
            "sh_coeffs": lr.sh_coeffs,
            "scales_raw": lr.scales_raw,
            "rotations": lr.rotations,
        },
        betas=cfg.adam_betas,
        eps=cfg.adam_eps,
    )

    rng = np.random.default_rng(cfg.seed)
    order = np.array([], dtype=np.int64)
    for step in range(cfg.iterations):
        if order.size == 0:
            order = rng.permutation(len(views))
        view_idx = int(order[0])
        order = order[1:]
        cam, target = views[view_idx]

        cloud = GaussianCloud(**params)
        color, saved = render_color_forward(cloud, cam, cfg.raster)
        loss, l1, dssim, upstream = loss_terms(
            color, target, cfg.lambda_dssim, cfg.ssim_window, cfg.ssim_sigma
        )
        if not np.isfinite(loss):
            raise FitDivergence(step, "loss", f"loss={loss}")
        grads = render_color_backward(saved, upstream)

        gdict = {
            "positions": grads.positions,
            "opacities_raw": grads.opacities_raw,
            "sh_coeffs": grads.sh_coeffs,
            "scales_raw": grads.scales_raw,
            "rotations": grads.rotations,
        }
        for name, g in gdict.items():
            if not np.isfinite(g).all():
                raise FitDivergence(step, name, "non-finite gradient")
        opt.step(params, gdict)
        params["rotations"] /= np.linalg.norm(params["rotations"], axis=1, keepdims=True)

        if log is not None:
            log.append((step, loss, l1, dssim))

    return GaussianCloud(**params)


def merge_views(
    original: list[tuple[Camera, np.ndarray]],
    refined: list[tuple[Camera, np.ndarray]],
) -> list[tuple[Camera, np.ndarray]]:
    """Concatenate view lists; on duplicate poses (within 1e-9) the
    original wins."""
    merged = list(original)
    for cam, img in refined:
        dup = any(
            np.abs(cam.R - oc.R).max() <= 1e-9 and np.abs(cam.t - oc.t).max() <= 1e-9
            for oc, _ in original
        )
        if not dup:
            merged.append((cam, img))
    return merged
