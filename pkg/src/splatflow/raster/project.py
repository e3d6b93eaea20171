"""Projection of 3D Gaussians to per-camera 2D splats.

The heavy lifting lives in `project_arrays`, a struct-of-arrays pass
that keeps every intermediate needed by both the renderers and the
analytic backward pass.  `project_splats` wraps it into the public
per-splat view.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.pose import quats_to_rotmats
from ..core.types import Camera, GaussianCloud, ProjectedSplat, sigmoid
from .config import RasterConfig
from .sh import sh_basis


@dataclass
class ProjectedArrays:
    """Depth-sorted projection intermediates for m visible splats.

    Kept around in full so the backward pass can re-use exactly the
    quantities the forward pass rendered from.
    """

    idx: np.ndarray          # (m,) source primitive indices
    t_cam: np.ndarray        # (m, 3) camera-space means
    depth: np.ndarray        # (m,) camera-space z
    mean2d: np.ndarray       # (m, 2) pixel coordinates
    J: np.ndarray            # (m, 2, 3) projection Jacobians
    tx_tilde: np.ndarray     # (m,) clamped x used inside J
    ty_tilde: np.ndarray     # (m,)
    tx_inside: np.ndarray    # (m,) bool, True when no clamping applied
    ty_inside: np.ndarray    # (m,)
    sigma3: np.ndarray       # (m, 3, 3) world-space covariances
    sigma_cam: np.ndarray    # (m, 3, 3) camera-space covariances
    cov2d: np.ndarray        # (m, 3) floored (xx, xy, yy)
    conic: np.ndarray        # (m, 3) inverse of floored cov2d: (a, b, c)
    radius: np.ndarray       # (m,) conservative pixel radius
    opacity: np.ndarray      # (m,) activated opacities
    color: np.ndarray        # (m, 3) view-evaluated, clipped to [0, 1]
    color_clip_mask: np.ndarray  # (m, 3) 1.0 where the clip was inactive
    sh_dir: np.ndarray       # (m, 3) unit view directions
    sh_vals: np.ndarray      # (m, B_active) basis values
    rotmats: np.ndarray      # (m, 3, 3) from normalized quaternions
    scales: np.ndarray       # (m, 3) activated scales
    degree: int              # active SH degree

    @property
    def count(self) -> int:
        return self.idx.shape[0]


def _clamp_limits(cam: Camera) -> tuple[float, float, float, float]:
    # Frustum guard for the Jacobian linearization point, with a 30%
    # margin outside the image; means far off-axis otherwise produce
    # unbounded covariances.
    tan_fovx = 0.5 * cam.width / cam.fx
    tan_fovy = 0.5 * cam.height / cam.fy
    lim_x_neg = cam.cx / cam.fx + 0.3 * tan_fovx
    lim_x_pos = (cam.width - cam.cx) / cam.fx + 0.3 * tan_fovx
    lim_y_neg = cam.cy / cam.fy + 0.3 * tan_fovy
    lim_y_pos = (cam.height - cam.cy) / cam.fy + 0.3 * tan_fovy
    return lim_x_neg, lim_x_pos, lim_y_neg, lim_y_pos


def project_arrays(cloud: GaussianCloud, cam: Camera, cfg: RasterConfig) -> ProjectedArrays:
    t_all = cam.world_to_cam(cloud.positions)
    z_all = t_all[:, 2]
    visible = (z_all > cam.near) & (z_all < cam.far)
    idx = np.nonzero(visible)[0]

    t = t_all[idx]                      # (m, 3)
    z = t[:, 2]
    m = idx.shape[0]

    # 2D means from the exact pinhole projection.
    mean2d = np.empty((m, 2))
    mean2d[:, 0] = cam.fx * t[:, 0] / z + cam.cx
    mean2d[:, 1] = cam.fy * t[:, 1] / z + cam.cy

    # Clamped linearization point for J only.
    lxn, lxp, lyn, lyp = _clamp_limits(cam)
    rx = t[:, 0] / z
    ry = t[:, 1] / z
    tx_inside = (rx >= -lxn) & (rx <= lxp)
    ty_inside = (ry >= -lyn) & (ry <= lyp)
    tx_tilde = np.where(tx_inside, t[:, 0], z * np.clip(rx, -lxn, lxp))
    ty_tilde = np.where(ty_inside, t[:, 1], z * np.clip(ry, -lyn, lyp))

    J = np.zeros((m, 2, 3))
    J[:, 0, 0] = cam.fx / z
    J[:, 0, 2] = -cam.fx * tx_tilde / (z * z)
    J[:, 1, 1] = cam.fy / z
    J[:, 1, 2] = -cam.fy * ty_tilde / (z * z)

    # World covariance Sigma = (R S)(R S)^T from activated scale and rotation.
    rotmats = quats_to_rotmats(cloud.rotations[idx])
    scales = np.exp(cloud.scales_raw[idx])
    M = rotmats * scales[:, None, :]
    sigma3 = M @ M.transpose(0, 2, 1)
    sigma_cam = np.einsum("ij,njk,lk->nil", cam.R, sigma3, cam.R)

    cov_full = np.einsum("nij,njk,nlk->nil", J, sigma_cam, J)  # (m, 2, 2)
    cov2d = np.empty((m, 3))
    cov2d[:, 0] = cov_full[:, 0, 0] + cfg.cov_floor
    cov2d[:, 1] = 0.5 * (cov_full[:, 0, 1] + cov_full[:, 1, 0])
    cov2d[:, 2] = cov_full[:, 1, 1] + cfg.cov_floor

    det = cov2d[:, 0] * cov2d[:, 2] - cov2d[:, 1] ** 2
    if m and det.min() <= 0.0:
        raise AssertionError("floored 2D covariance must be positive definite")
    conic = np.empty((m, 3))
    conic[:, 0] = cov2d[:, 2] / det
    conic[:, 1] = -cov2d[:, 1] / det
    conic[:, 2] = cov2d[:, 0] / det

    mid = 0.5 * (cov2d[:, 0] + cov2d[:, 2])
    lam_max = mid + np.sqrt(np.maximum(mid * mid - det, 0.0))
    radius = 3.0 * np.sqrt(lam_max)

    # View-dependent color from SH in the direction camera-center -> mean.
    degree = min(cfg.sh_degree_active, cloud.sh_degree)
    basis = (degree + 1) ** 2
    delta = cloud.positions[idx] - cam.center()
    dist = np.linalg.norm(delta, axis=1, keepdims=True)
    sh_dir = np.divide(delta, dist, out=np.zeros_like(delta), where=dist > 1e-12)
    sh_vals = sh_basis(sh_dir, degree) if m else np.zeros((0, basis))
    raw = 0.5 + np.einsum("nb,nbc->nc", sh_vals, cloud.sh_coeffs[idx, :basis, :])
    color = np.clip(raw, 0.0, 1.0)
    color_clip_mask = ((raw > 0.0) & (raw < 1.0)).astype(np.float64)

    opacity = sigmoid(cloud.opacities_raw[idx])

    # Canonical order: near-to-far, primitive index breaking ties.
    order = np.lexsort((idx, z))
    return ProjectedArrays(
        idx=idx[order],
        t_cam=t[order],
        depth=z[order],
        mean2d=mean2d[order],
        J=J[order],
        tx_tilde=tx_tilde[order],
        ty_tilde=ty_tilde[order],
        tx_inside=tx_inside[order],
        ty_inside=ty_inside[order],
        sigma3=sigma3[order],
        sigma_cam=sigma_cam[order],
        cov2d=cov2d[order],
        conic=conic[order],
        radius=radius[order],
        opacity=opacity[order],
        color=color[order],
        color_clip_mask=color_clip_mask[order],
        sh_dir=sh_dir[order],
        sh_vals=sh_vals[order],
        rotmats=rotmats[order],
        scales=scales[order],
        degree=degree,
    )


def project_splats(cloud: GaussianCloud, cam: Camera, cfg: RasterConfig | None = None) -> list[ProjectedSplat]:
    """Public per-splat projection view (depth-sorted, culled by z)."""
    cfg = cfg or RasterConfig()
    arrs = project_arrays(cloud, cam, cfg)
    return [
        ProjectedSplat(
            mean2d=arrs.mean2d[i].copy(),
            cov2d=tuple(arrs.cov2d[i]),
            inv_cov2d=tuple(arrs.conic[i]),
            depth_cam=float(arrs.depth[i]),
            color_eval=arrs.color[i].copy(),
            opacity=float(arrs.opacity[i]),
            radius_px=float(arrs.radius[i]),
            index=int(arrs.idx[i]),
        )
        for i in range(arrs.count)
    ]
