"""Flow-matching primitives: training tuples and ODE sampling.

The interpolant is x_t = t*x1 + (1-t)*x0 with x0 ~ N(0, I); its
velocity x1 - x0 is the regression target.  Sampling integrates the
learned field from t=0 to t=1 with fixed-step explicit Euler.
"""

from __future__ import annotations

import numpy as np
import torch

from ..core.types import VideoTensor
from .model import RefinerModel
from .patchify import LatentVideo, decode


def fm_sample_training_tuple(
    x1: np.ndarray, seed: int
) -> tuple[np.ndarray, float, np.ndarray, np.ndarray]:
    """Returns (x_t, t, v_target, x0) for one clean latent x1.

    The noise is quantized to a 2^-26 grid so that for float32-valued
    data the identities v_target == x1 - x0 and v_target + x0 == x1
    hold bitwise in float64, not just to rounding error.
    """
    rng = np.random.default_rng(seed)
    x1 = np.asarray(x1, dtype=np.float64)
    x0 = np.round(rng.standard_normal(x1.shape) * (1 << 26)) / (1 << 26)
    t = float(rng.uniform())
    x_t = t * x1 + (1.0 - t) * x0
    v_target = x1 - x0
    return x_t, t, v_target, x0


def euler_integrate(
    velocity_fn,
    x0: torch.Tensor,
    steps: int,
) -> torch.Tensor:
    """x(1) from x(0) under dx/dt = velocity_fn(x, t), uniform steps.

    The state accumulates in float64 (velocity_fn still sees the input
    dtype), so constant fields integrate exactly for any step count up
    to one final rounding.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    dtype = x0.dtype
    x = x0.to(torch.float64)
    dt = 1.0 / steps
    for k in range(steps):
        t = k / steps
        x = x + dt * velocity_fn(x.to(dtype), t).to(torch.float64)
    return x.to(dtype)


def generate(
    model: RefinerModel,
    cond: LatentVideo | None,
    steps: int = 50,
    seed: int = 0,
) -> VideoTensor:
    """Integrate noise to a video latent and decode to color frames."""
    cfg = model.cfg
    if cond is not None:
        grid = cond.grid
        cond_t = (
            torch.from_numpy(np.ascontiguousarray(cond.tokens, dtype=np.float32))
            .permute(3, 0, 1, 2)[None]
        )
    else:
        if cfg.grid is None:
            raise ValueError("unconditional generation needs cfg.grid")
        grid = cfg.grid
        cond_t = None
    n = grid[0] * grid[1] * grid[2]

    gen = torch.Generator().manual_seed(seed)
    x0 = torch.randn(1, n, cfg.latent_channels, generator=gen)

    model.eval()
    with torch.no_grad():
        def vel(x, t):
            tt = torch.full((1,), t, dtype=torch.float32)
            return model(x, tt, grid, cond=cond_t)

        x1 = euler_integrate(vel, x0, steps)

    tokens = x1[0].reshape(grid + (cfg.latent_channels,)).numpy()
    video = decode(LatentVideo(tokens=tokens, ps=cfg.ps, pt=cfg.pt), channels=cfg.in_channels)
    frames = np.clip((video.frames + 1.0) * 0.5, 0.0, 1.0)
    return VideoTensor(frames)
