from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class RasterConfig:
    """Rasterization knobs shared by the tile and reference renderers.

    Pixels are sampled at their centers (x + 0.5, y + 0.5).  A splat
    contributes to a pixel only when its Gaussian weight clears
    alpha_cutoff AND the pixel lies inside the splat's radius_px box;
    the box test is part of the blending semantics so both renderers
    agree exactly.
    """

    tile_size: int = 16
    alpha_cutoff: float = 1.0 / 255.0       # minimum per-splat contribution
    transmittance_floor: float = 1e-4       # front-to-back early exit
    cov_floor: float = 0.3                  # px^2 added to the 2D covariance diagonal
    normal_tau: float = 0.5                 # alpha threshold for valid normals
    sh_degree_active: int = 1

    def __post_init__(self):
        if self.tile_size not in (8, 16, 32):
            raise ValueError(f"tile_size must be 8, 16 or 32, got {self.tile_size}")
        if not (0.0 <= self.alpha_cutoff < 1.0):
            raise ValueError("alpha_cutoff must be in [0, 1)")
        if not (0.0 <= self.transmittance_floor < 1.0):
            raise ValueError("transmittance_floor must be in [0, 1)")
        if self.cov_floor <= 0.0:
            raise ValueError("cov_floor must be positive")
        if not (0.0 < self.normal_tau < 1.0):
            raise ValueError("normal_tau must be in (0, 1)")
        if self.sh_degree_active not in (0, 1, 2, 3):
            raise ValueError("sh_degree_active must be 0..3")
