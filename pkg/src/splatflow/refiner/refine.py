"""Inference: corrupted buffer videos in, refined color video out."""

from __future__ import annotations

from ..core.types import VideoTensor
from ..raster.render import GPVideo
from .flow import generate
from .model import RefinerModel
from .patchify import encode_gpbuffer


def refine_video(
    model: RefinerModel,
    corrupted: GPVideo,
    steps: int = 50,
    seed: int = 0,
) -> VideoTensor:
    cfg = model.cfg
    cond = encode_gpbuffer(
        corrupted, ps=cfg.ps, pt=cfg.pt, near=cfg.norm_near, far=cfg.norm_far
    )
    if cfg.grid is not None and cond.grid != cfg.grid:
        raise ValueError(f"input latent grid {cond.grid} != training grid {cfg.grid}")
    return generate(model, cond, steps=steps, seed=seed)
