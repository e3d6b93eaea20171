"""Screen-space normals from the expected-depth map.

Backprojects each pixel to a camera-space point, takes finite
differences along the image axes (central in the interior, one-sided at
borders), and crosses the two tangents.  Pixels whose own alpha, or any
neighbor's alpha used by the stencil, falls at or below tau get a zero
normal so silhouettes never mix foreground and background geometry.
"""

from __future__ import annotations

import numpy as np

from ..core.types import Camera
from .config import RasterConfig


def compute_normals(
    depth: np.ndarray,
    alpha: np.ndarray,
    cam: Camera,
    cfg: RasterConfig | None = None,
) -> np.ndarray:
    cfg = cfg or RasterConfig()
    h, w = depth.shape
    vs, us = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    # Camera-space position map: depth * K^-1 [u, v, 1]^T at pixel centers.
    x = depth * (us + 0.5 - cam.cx) / cam.fx
    y = depth * (vs + 0.5 - cam.cy) / cam.fy
    p_cam = np.stack([x, y, depth], axis=-1)  # (H, W, 3)

    if h < 2 or w < 2:
        return np.zeros((h, w, 3))

    dv = np.gradient(p_cam, axis=0)  # d/d(row) = image-y tangent
    du = np.gradient(p_cam, axis=1)  # d/d(col) = image-x tangent
    n = np.cross(du, dv)

    ok = alpha > cfg.normal_tau
    okp = np.pad(ok, 1, mode="edge")
    valid = ok & okp[:-2, 1:-1] & okp[2:, 1:-1] & okp[1:-1, :-2] & okp[1:-1, 2:]

    norm = np.linalg.norm(n, axis=-1)
    valid &= norm > 1e-12
    n = np.divide(n, norm[..., None], out=np.zeros_like(n), where=valid[..., None])

    # Face the camera: flip where the normal points along the viewing ray.
    flip = np.einsum("hwc,hwc->hw", n, p_cam) > 0.0
    n = np.where(flip[..., None], -n, n)
    n[~valid] = 0.0
    return n
