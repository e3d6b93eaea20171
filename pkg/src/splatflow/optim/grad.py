"""Differentiable color rendering: forward plus hand-derived backward.

The forward pass repeats the renderer's per-pixel blending (same
projection arrays, same include/early-exit semantics).  The backward
pass chains the upstream image gradient through, in order:

    blending weights  ->  per-splat gamma        (suffix recurrence, no
                                                  division by 1 - gamma)
    gamma             ->  conic, 2D mean, opacity
    conic             ->  floored 2D covariance  (dQ -> -Q G Q)
    2D covariance     ->  J, camera covariance   (Sigma' = J A J^T)
    camera covariance ->  world covariance, R, scales, quaternion
    J, 2D mean        ->  camera-space mean      (with clamp masks)
    SH color          ->  coefficients and view direction -> position
    activations       ->  raw (logit / log) parameters

Indicator masks (alpha cutoff, radius box, transmittance floor) are
treated as constants of the forward pass, exactly as rendered.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.types import Camera, GaussianCloud
from ..raster.config import RasterConfig
from ..raster.project import ProjectedArrays, project_arrays
from ..raster.sh import sh_basis_grad

# Cache per-pixel forward state up to this many (splat, pixel) entries;
# beyond it the backward pass recomputes per chunk.
_CACHE_LIMIT = 8_000_000


@dataclass
class GradBuffer:
    """Loss gradients w.r.t. the raw cloud parameters."""

    positions: np.ndarray      # (N, 3)
    opacities_raw: np.ndarray  # (N,)
    sh_coeffs: np.ndarray      # (N, B, 3)
    scales_raw: np.ndarray     # (N, 3)
    rotations: np.ndarray      # (N, 4)

    @classmethod
    def zeros_like(cls, cloud: GaussianCloud) -> "GradBuffer":
        return cls(
            positions=np.zeros_like(cloud.positions),
            opacities_raw=np.zeros_like(cloud.opacities_raw),
            sh_coeffs=np.zeros_like(cloud.sh_coeffs),
            scales_raw=np.zeros_like(cloud.scales_raw),
            rotations=np.zeros_like(cloud.rotations),
        )

    def max_abs(self) -> float:
        return max(
            (float(np.abs(a).max()) if a.size else 0.0)
            for a in (self.positions, self.opacities_raw, self.sh_coeffs, self.scales_raw, self.rotations)
        )


@dataclass
class _Saved:
    cloud: GaussianCloud
    cam: Camera
    cfg: RasterConfig
    arrs: ProjectedArrays
    px: np.ndarray
    py: np.ndarray
    g_cache: np.ndarray | None        # (m, P) exp term
    include_cache: np.ndarray | None  # (m, P) bool
    trans_cache: np.ndarray | None    # (m, P) transmittance before each splat


def _chunk_state(arrs: ProjectedArrays, cfg: RasterConfig, px, py):
    """gamma-related state for a pixel chunk; mirrors blend_pixels exactly."""
    mean = arrs.mean2d
    conic = arrs.conic
    dx = px[None, :] - mean[:, 0, None]
    dy = py[None, :] - mean[:, 1, None]
    bbox = (np.abs(dx) <= arrs.radius[:, None]) & (np.abs(dy) <= arrs.radius[:, None])
    q = conic[:, 0, None] * dx * dx + 2.0 * conic[:, 1, None] * dx * dy + conic[:, 2, None] * dy * dy
    g = np.zeros_like(q)
    np.exp(-0.5 * q, out=g, where=bbox)
    gamma = arrs.opacity[:, None] * g
    include = bbox & (gamma >= cfg.alpha_cutoff)
    gamma = np.where(include, gamma, 0.0)
    trans = np.cumprod(1.0 - gamma, axis=0)
    T = np.empty_like(trans)
    T[0] = 1.0
    T[1:] = trans[:-1]
    return dx, dy, g, include, gamma, T


def render_color_forward(
    cloud: GaussianCloud, cam: Camera, cfg: RasterConfig | None = None
) -> tuple[np.ndarray, _Saved]:
    cfg = cfg or RasterConfig()
    arrs = project_arrays(cloud, cam, cfg)
    h, w = cam.height, cam.width
    xs = np.arange(w, dtype=np.float64) + 0.5
    ys = np.arange(h, dtype=np.float64) + 0.5
    gx, gy = np.meshgrid(xs, ys)
    px, py = gx.ravel(), gy.ravel()

    m = arrs.count
    n_px = h * w
    color = np.zeros((n_px, 3))
    cache = m * n_px <= _CACHE_LIMIT
    g_cache = include_cache = trans_cache = None
    if m:
        chunk = n_px if cache else max(1, int(2_000_000 // m))
        if cache:
            g_cache = np.empty((m, n_px))
            include_cache = np.empty((m, n_px), dtype=bool)
            trans_cache = np.empty((m, n_px))
        for s in range(0, n_px, chunk):
            e = min(s + chunk, n_px)
            _, _, g, include, gamma, T = _chunk_state(arrs, cfg, px[s:e], py[s:e])
            wgt = gamma * T
            if cfg.transmittance_floor > 0.0:
                wgt = np.where(T >= cfg.transmittance_floor, wgt, 0.0)
            color[s:e] = np.einsum("mp,mc->pc", wgt, arrs.color)
            if cache:
                g_cache[:, s:e] = g
                include_cache[:, s:e] = include
                trans_cache[:, s:e] = T

    saved = _Saved(cloud, cam, cfg, arrs, px, py, g_cache, include_cache, trans_cache)
    return color.reshape(h, w, 3), saved


def render_color_backward(saved: _Saved, upstream: np.ndarray) -> GradBuffer:
    cloud, cam, cfg, arrs = saved.cloud, saved.cam, saved.cfg, saved.arrs
    h, w = cam.height, cam.width
    if upstream.shape != (h, w, 3):
        raise ValueError(f"upstream gradient must be ({h}, {w}, 3), got {upstream.shape}")
    up = np.asarray(upstream, dtype=np.float64).reshape(-1, 3)

    grads = GradBuffer.zeros_like(cloud)
    m = arrs.count
    if m == 0 or not np.any(up):
        return grads

    d_color = np.zeros((m, 3))
    d_opacity = np.zeros(m)
    d_conic = np.zeros((m, 2, 2))
    d_mean = np.zeros((m, 2))

    n_px = saved.px.shape[0]
    cached = saved.g_cache is not None
    chunk = n_px if cached else max(1, int(2_000_000 // m))
    for s in range(0, n_px, chunk):
        e = min(s + chunk, n_px)
        pxc, pyc = saved.px[s:e], saved.py[s:e]
        if cached:
            g = saved.g_cache[:, s:e]
            include = saved.include_cache[:, s:e]
            T = saved.trans_cache[:, s:e]
            dx = pxc[None, :] - arrs.mean2d[:, 0, None]
            dy = pyc[None, :] - arrs.mean2d[:, 1, None]
            gamma = np.where(include, arrs.opacity[:, None] * g, 0.0)
        else:
            dx, dy, g, include, gamma, T = _chunk_state(arrs, cfg, pxc, pyc)
        if cfg.transmittance_floor > 0.0:
            live = T >= cfg.transmittance_floor
            wgt = gamma * T * live
            masked_ucdot = lambda row, k: np.where(live[k], row, 0.0)  # noqa: E731
        else:
            live = None
            wgt = gamma * T
            masked_ucdot = lambda row, k: row  # noqa: E731

        upc = up[s:e]
        ucdot = np.einsum("mc,pc->mp", arrs.color, upc)

        d_color += np.einsum("mp,pc->mc", wgt, upc)

        # Suffix accumulation of occluded contributions, back-to-front
        # with a running vector (no division by 1 - gamma).
        d_gamma = np.empty_like(gamma)
        behind = np.zeros(e - s)
        for k in range(m - 1, -1, -1):
            direct = masked_ucdot(ucdot[k], k)
            np.subtract(direct, behind, out=d_gamma[k])
            d_gamma[k] *= T[k]
            # behind_{k-1} = bc_k + (1 - gamma_k) * behind_k
            behind *= 1.0 - gamma[k]
            behind += direct * gamma[k]
        d_gamma[~include] = 0.0

        d_opacity += np.einsum("mp,mp->m", d_gamma, g)
        dq = d_gamma
        dq *= g
        dq *= arrs.opacity[:, None]
        dq *= -0.5
        d_conic[:, 0, 0] += np.einsum("mp,mp,mp->m", dq, dx, dx)
        d_conic[:, 0, 1] += np.einsum("mp,mp,mp->m", dq, dx, dy)
        d_conic[:, 1, 0] = d_conic[:, 0, 1]
        d_conic[:, 1, 1] += np.einsum("mp,mp,mp->m", dq, dy, dy)
        a, b, c = arrs.conic[:, 0, None], arrs.conic[:, 1, None], arrs.conic[:, 2, None]
        d_mean[:, 0] += -2.0 * (np.einsum("mp,mp->m", dq * a, dx) + np.einsum("mp,mp->m", dq * b, dy))
        d_mean[:, 1] += -2.0 * (np.einsum("mp,mp->m", dq * b, dx) + np.einsum("mp,mp->m", dq * c, dy))

    # conic = inverse of floored covariance: dSigma = -Q G Q.
    Q = np.empty((m, 2, 2))
    Q[:, 0, 0], Q[:, 0, 1] = arrs.conic[:, 0], arrs.conic[:, 1]
    Q[:, 1, 0], Q[:, 1, 1] = arrs.conic[:, 1], arrs.conic[:, 2]
    d_sigma2 = -np.einsum("nij,njk,nkl->nil", Q, d_conic, Q)

    J = arrs.J
    d_sigma_cam = np.einsum("nji,njk,nkl->nil", J, d_sigma2, J)
    d_J = 2.0 * np.einsum("nij,njk,nkl->nil", d_sigma2, J, arrs.sigma_cam)
    d_sigma3 = np.einsum("ji,njk,kl->nil", cam.R, d_sigma_cam, cam.R)

    M = arrs.rotmats * arrs.scales[:, None, :]
    d_M = 2.0 * np.einsum("nij,njk->nik", d_sigma3, M)
    d_rot = d_M * arrs.scales[:, None, :]
    d_scale = np.einsum("nij,nij->nj", d_M, arrs.rotmats)
    d_scales_raw = d_scale * arrs.scales

    # Rotation matrix -> normalized quaternion partials.
    qn = cloud.rotations[arrs.idx]
    norm = np.linalg.norm(qn, axis=1, keepdims=True)
    qh = qn / norm
    qw, qx, qy, qz = qh[:, 0], qh[:, 1], qh[:, 2], qh[:, 3]
    r = d_rot
    d_qw = 2.0 * (-r[:, 0, 1] * qz + r[:, 0, 2] * qy + r[:, 1, 0] * qz
                  - r[:, 1, 2] * qx - r[:, 2, 0] * qy + r[:, 2, 1] * qx)
    d_qx = 2.0 * (r[:, 0, 1] * qy + r[:, 0, 2] * qz + r[:, 1, 0] * qy
                  - 2.0 * r[:, 1, 1] * qx - r[:, 1, 2] * qw + r[:, 2, 0] * qz
                  + r[:, 2, 1] * qw - 2.0 * r[:, 2, 2] * qx)
    d_qy = 2.0 * (-2.0 * r[:, 0, 0] * qy + r[:, 0, 1] * qx + r[:, 0, 2] * qw
                  + r[:, 1, 0] * qx + r[:, 1, 2] * qz - r[:, 2, 0] * qw
                  + r[:, 2, 1] * qz - 2.0 * r[:, 2, 2] * qy)
    d_qz = 2.0 * (-2.0 * r[:, 0, 0] * qz - r[:, 0, 1] * qw + r[:, 0, 2] * qx
                  + r[:, 1, 0] * qw - 2.0 * r[:, 1, 1] * qz + r[:, 1, 2] * qy
                  + r[:, 2, 0] * qx + r[:, 2, 1] * qy)
    d_qhat = np.stack([d_qw, d_qx, d_qy, d_qz], axis=1)
    d_quat = (d_qhat - qh * np.einsum("ni,ni->n", qh, d_qhat)[:, None]) / norm

    # Camera-space mean gradient: projection of the 2D mean plus the
    # Jacobian's dependence on the (clamped) linearization point.
    z = arrs.depth
    z2, z3 = z * z, z * z * z
    d_t = np.einsum("nji,nj->ni", J, d_mean)
    d_txt = d_J[:, 0, 2] * (-cam.fx / z2)
    d_tyt = d_J[:, 1, 2] * (-cam.fy / z2)
    d_z = (d_J[:, 0, 0] * (-cam.fx / z2) + d_J[:, 1, 1] * (-cam.fy / z2)
           + d_J[:, 0, 2] * (2.0 * cam.fx * arrs.tx_tilde / z3)
           + d_J[:, 1, 2] * (2.0 * cam.fy * arrs.ty_tilde / z3))
    in_x = arrs.tx_inside.astype(np.float64)
    in_y = arrs.ty_inside.astype(np.float64)
    d_t[:, 0] += d_txt * in_x
    d_t[:, 1] += d_tyt * in_y
    d_t[:, 2] += d_z + d_txt * (1.0 - in_x) * (arrs.tx_tilde / z) + d_tyt * (1.0 - in_y) * (arrs.ty_tilde / z)
    d_pos = np.einsum("ni,ij->nj", d_t, cam.R)

    # Color: clip mask, SH coefficients, view direction.
    d_craw = d_color * arrs.color_clip_mask
    basis = arrs.sh_vals.shape[1]
    d_sh = np.einsum("nb,nc->nbc", arrs.sh_vals, d_craw)
    s_dot = np.einsum("nbc,nc->nb", cloud.sh_coeffs[arrs.idx, :basis, :], d_craw)
    gb = sh_basis_grad(arrs.sh_dir, arrs.degree)
    d_dir = np.einsum("nbd,nb->nd", gb, s_dot)
    delta = cloud.positions[arrs.idx] - cam.center()
    dist = np.linalg.norm(delta, axis=1, keepdims=True)
    safe = (dist > 1e-12).ravel()
    vhat = np.divide(delta, dist, out=np.zeros_like(delta), where=dist > 1e-12)
    d_pos_dir = (d_dir - vhat * np.einsum("ni,ni->n", vhat, d_dir)[:, None])
    d_pos_dir = np.divide(d_pos_dir, dist, out=np.zeros_like(d_pos_dir), where=dist > 1e-12)
    d_pos += np.where(safe[:, None], d_pos_dir, 0.0)

    alpha = arrs.opacity
    d_opacity_raw = d_opacity * alpha * (1.0 - alpha)

    grads.positions[arrs.idx] = d_pos
    grads.opacities_raw[arrs.idx] = d_opacity_raw
    grads.sh_coeffs[arrs.idx, :basis, :] = d_sh
    grads.scales_raw[arrs.idx] = d_scales_raw
    grads.rotations[arrs.idx] = d_quat
    return grads


def render_color_with_grad(
    cloud: GaussianCloud,
    cam: Camera,
    cfg: RasterConfig | None,
    upstream: np.ndarray,
) -> tuple[np.ndarray, GradBuffer]:
    color, saved = render_color_forward(cloud, cam, cfg)
    return color, render_color_backward(saved, upstream)
