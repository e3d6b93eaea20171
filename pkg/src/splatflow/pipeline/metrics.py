"""Image quality metrics and held-out evaluation reports."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..core.types import Camera, GaussianCloud
from ..optim.ssim import ssim as _ssim
from ..raster.config import RasterConfig
from ..raster.render import render_gpbuffer


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """10 log10(1 / MSE) on [0, 1] images; +inf for exact matches."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    mse = float(np.mean((np.asarray(a, np.float64) - np.asarray(b, np.float64)) ** 2))
    return float("inf") if mse == 0.0 else float(10.0 * np.log10(1.0 / mse))


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return _ssim(a, b)


@dataclass
class EvalReport:
    psnr_per_view: list[float]
    ssim_per_view: list[float]

    @property
    def psnr_mean(self) -> float:
        return float(np.mean(self.psnr_per_view))

    @property
    def psnr_median(self) -> float:
        return float(np.median(self.psnr_per_view))

    @property
    def ssim_mean(self) -> float:
        return float(np.mean(self.ssim_per_view))

    @property
    def ssim_median(self) -> float:
        return float(np.median(self.ssim_per_view))

    def to_dict(self) -> dict:
        return {
            "psnr_per_view": self.psnr_per_view,
            "ssim_per_view": self.ssim_per_view,
            "psnr_mean": self.psnr_mean,
            "psnr_median": self.psnr_median,
            "ssim_mean": self.ssim_mean,
            "ssim_median": self.ssim_median,
            "n_views": len(self.psnr_per_view),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        d = json.loads(text)
        return cls(psnr_per_view=[float(v) for v in d["psnr_per_view"]],
                   ssim_per_view=[float(v) for v in d["ssim_per_view"]])

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())


def evaluate(
    cloud: GaussianCloud,
    held_out: list[tuple[Camera, np.ndarray]],
    cfg: RasterConfig | None = None,
) -> EvalReport:
    """Render each held-out view (color only) and score it."""
    if not held_out:
        raise ValueError("need at least one held-out view")
    cfg = cfg or RasterConfig()
    ps, ss = [], []
    for cam, target in held_out:
        rendered = render_gpbuffer(cloud, cam, cfg).color
        ps.append(psnr(rendered, target))
        ss.append(ssim(rendered, target))
    return EvalReport(psnr_per_view=ps, ssim_per_view=ss)
