"""Forward rasterization of the five-modality buffer.

Two renderers share one per-pixel blending contract:

    gamma_i = opacity_i * exp(-0.5 * d^T conic_i d),  d = pixel - mean2d_i
    include: gamma_i >= alpha_cutoff and |d| <= radius_px (per axis)
    front-to-back over (depth, index)-sorted splats while the running
    transmittance stays >= transmittance_floor.

`render_gpbuffer` bins splats into tiles and processes tiles
independently (parallelizable, disjoint output regions).
`render_reference` walks every pixel against every sorted splat and is
the correctness oracle for the tile path.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..core.types import Camera, GaussianCloud, GPBuffer, VideoTensor
from .config import RasterConfig
from .normals import compute_normals
from .project import ProjectedArrays, project_arrays


@dataclass(frozen=True)
class GPVideo:
    """Five modality videos rendered along one camera trajectory."""

    color: VideoTensor        # (T, H, W, 3)
    alpha: VideoTensor        # (T, H, W, 1)
    depth: VideoTensor        # (T, H, W, 1)
    normal: VideoTensor       # (T, H, W, 3)
    uncertainty: VideoTensor  # (T, H, W, 3)

    @property
    def num_frames(self) -> int:
        return self.color.frames.shape[0]

    def frame(self, i: int) -> GPBuffer:
        return GPBuffer(
            color=self.color.frames[i],
            alpha=self.alpha.frames[i, :, :, 0],
            depth=self.depth.frames[i, :, :, 0],
            normal=self.normal.frames[i],
            uncertainty=self.uncertainty.frames[i],
        )


def blend_pixels(
    arrs: ProjectedArrays,
    sel: np.ndarray,
    px: np.ndarray,
    py: np.ndarray,
    cfg: RasterConfig,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Blend the selected (sorted) splats over a flat pixel set.

    Returns (color (P,3), alpha (P,), depth_sum (P,), uncert (P,3));
    depth_sum is the unnormalized expected-depth numerator.
    """
    p = px.shape[0]
    if sel.shape[0] == 0:
        return np.zeros((p, 3)), np.zeros(p), np.zeros(p), np.zeros((p, 3))

    mean = arrs.mean2d[sel]
    conic = arrs.conic[sel]
    radius = arrs.radius[sel]
    dx = px[None, :] - mean[:, 0, None]   # (m, P)
    dy = py[None, :] - mean[:, 1, None]
    bbox = (np.abs(dx) <= radius[:, None]) & (np.abs(dy) <= radius[:, None])
    q = conic[:, 0, None] * dx * dx + 2.0 * conic[:, 1, None] * dx * dy + conic[:, 2, None] * dy * dy
    g = np.zeros_like(q)
    np.exp(-0.5 * q, out=g, where=bbox)
    gamma = arrs.opacity[sel, None] * g
    include = bbox & (gamma >= cfg.alpha_cutoff)
    gamma = np.where(include, gamma, 0.0)

    trans = np.cumprod(1.0 - gamma, axis=0)
    T = np.empty_like(trans)
    T[0] = 1.0
    T[1:] = trans[:-1]
    w = gamma * T
    if cfg.transmittance_floor > 0.0:
        w = np.where(T >= cfg.transmittance_floor, w, 0.0)

    color = np.einsum("mp,mc->pc", w, arrs.color[sel])
    alpha = np.einsum("mp->p", w)
    depth_sum = np.einsum("mp,m->p", w, arrs.depth[sel])
    uncert = np.einsum("mp,mc->pc", w, conic)
    return color, alpha, depth_sum, uncert


def _pixel_centers(x0: int, x1: int, y0: int, y1: int) -> tuple[np.ndarray, np.ndarray]:
    xs = np.arange(x0, x1, dtype=np.float64) + 0.5
    ys = np.arange(y0, y1, dtype=np.float64) + 0.5
    gx, gy = np.meshgrid(xs, ys)
    return gx.ravel(), gy.ravel()


def _finalize(
    cam: Camera,
    cfg: RasterConfig,
    color: np.ndarray,
    alpha: np.ndarray,
    depth_sum: np.ndarray,
    uncert: np.ndarray,
) -> GPBuffer:
    depth = np.divide(depth_sum, alpha, out=np.zeros_like(depth_sum), where=alpha > 0.0)
    normal = compute_normals(depth, alpha, cam, cfg)
    return GPBuffer(color=color, alpha=alpha, depth=depth, normal=normal, uncertainty=uncert)


def render_gpbuffer(
    cloud: GaussianCloud,
    cam: Camera,
    cfg: RasterConfig | None = None,
    workers: int = 1,
) -> GPBuffer:
    """Tile-based forward render of all five modalities."""
    cfg = cfg or RasterConfig()
    arrs = project_arrays(cloud, cam, cfg)
    h, w = cam.height, cam.width
    color = np.zeros((h, w, 3))
    alpha = np.zeros((h, w))
    depth_sum = np.zeros((h, w))
    uncert = np.zeros((h, w, 3))

    ts = cfg.tile_size
    tiles = [
        (tx, ty)
        for ty in range((h + ts - 1) // ts)
        for tx in range((w + ts - 1) // ts)
    ]

    # Pixel-center bounding boxes of each splat, used for tile binning.
    x_lo = arrs.mean2d[:, 0] - arrs.radius - 0.5
    x_hi = arrs.mean2d[:, 0] + arrs.radius - 0.5
    y_lo = arrs.mean2d[:, 1] - arrs.radius - 0.5
    y_hi = arrs.mean2d[:, 1] + arrs.radius - 0.5

    def run_tile(tile: tuple[int, int]) -> None:
        tx, ty = tile
        px0, px1 = tx * ts, min((tx + 1) * ts, w)
        py0, py1 = ty * ts, min((ty + 1) * ts, h)
        sel = np.nonzero(
            (x_hi >= px0) & (x_lo <= px1 - 1) & (y_hi >= py0) & (y_lo <= py1 - 1)
        )[0]
        gx, gy = _pixel_centers(px0, px1, py0, py1)
        c, a, d, u = blend_pixels(arrs, sel, gx, gy, cfg)
        sh = (py1 - py0, px1 - px0)
        color[py0:py1, px0:px1] = c.reshape(sh + (3,))
        alpha[py0:py1, px0:px1] = a.reshape(sh)
        depth_sum[py0:py1, px0:px1] = d.reshape(sh)
        uncert[py0:py1, px0:px1] = u.reshape(sh + (3,))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_tile, tiles))
    else:
        for tile in tiles:
            run_tile(tile)

    return _finalize(cam, cfg, color, alpha, depth_sum, uncert)


def render_reference(
    cloud: GaussianCloud,
    cam: Camera,
    cfg: RasterConfig | None = None,
) -> GPBuffer:
    """Brute-force oracle: no tiling, every pixel against every splat."""
    cfg = cfg or RasterConfig()
    arrs = project_arrays(cloud, cam, cfg)
    h, w = cam.height, cam.width
    gx, gy = _pixel_centers(0, w, 0, h)
    sel = np.arange(arrs.count)

    # Chunk pixel rows to bound the (splats x pixels) working set.
    chunk = max(1, int(2_000_000 // max(arrs.count, 1)))
    color = np.zeros((h * w, 3))
    alpha = np.zeros(h * w)
    depth_sum = np.zeros(h * w)
    uncert = np.zeros((h * w, 3))
    for s in range(0, h * w, chunk):
        e = min(s + chunk, h * w)
        c, a, d, u = blend_pixels(arrs, sel, gx[s:e], gy[s:e], cfg)
        color[s:e], alpha[s:e], depth_sum[s:e], uncert[s:e] = c, a, d, u

    return _finalize(
        cam, cfg,
        color.reshape(h, w, 3), alpha.reshape(h, w),
        depth_sum.reshape(h, w), uncert.reshape(h, w, 3),
    )


def render_trajectory(
    cloud: GaussianCloud,
    cams: list[Camera],
    cfg: RasterConfig | None = None,
    workers: int = 1,
) -> GPVideo:
    """Render every camera and stack per-modality videos."""
    if not cams:
        raise ValueError("need at least one camera")
    cfg = cfg or RasterConfig()
    bufs = [render_gpbuffer(cloud, cam, cfg, workers=workers) for cam in cams]
    return GPVideo(
        color=VideoTensor(np.stack([b.color for b in bufs])),
        alpha=VideoTensor(np.stack([b.alpha[..., None] for b in bufs])),
        depth=VideoTensor(np.stack([b.depth[..., None] for b in bufs])),
        normal=VideoTensor(np.stack([b.normal for b in bufs])),
        uncertainty=VideoTensor(np.stack([b.uncertainty for b in bufs])),
    )
