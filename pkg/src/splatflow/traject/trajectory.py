"""Smooth camera paths between capture poses.

Each key pose is decomposed into position / look-at / up vectors; the
three component tracks are B-spline-interpolated independently (clamped
knots, so the path starts and ends exactly at real captures) and poses
are rebuilt per sample by orthonormalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.types import Camera
from .spline import bspline_curve


@dataclass(frozen=True)
class PoseDecomposition:
    position: np.ndarray  # (3,) camera center
    look_at: np.ndarray   # (3,) point one unit ahead along the view axis
    up: np.ndarray        # (3,) unit up vector

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=np.float64).reshape(3)
        la = np.asarray(self.look_at, dtype=np.float64).reshape(3)
        up = np.asarray(self.up, dtype=np.float64).reshape(3)
        fwd = la - pos
        if np.linalg.norm(fwd) <= 1e-9:
            raise ValueError("look_at coincides with position")
        cosang = abs(np.dot(fwd / np.linalg.norm(fwd), up / np.linalg.norm(up)))
        if cosang > np.cos(1e-4):
            raise ValueError("up is parallel to the view direction")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "look_at", la)
        object.__setattr__(self, "up", up)


@dataclass(frozen=True)
class TrajectoryConfig:
    samples_per_segment: int = 8
    spline_degree: int = 3

    def __post_init__(self):
        if self.samples_per_segment < 1:
            raise ValueError("samples_per_segment must be >= 1")
        if self.spline_degree != 3:
            raise ValueError("spline_degree is fixed at 3 (cubic)")


def decompose(cam: Camera) -> PoseDecomposition:
    center = cam.center()
    forward = cam.R.T @ np.array([0.0, 0.0, 1.0])
    up = cam.R.T @ np.array([0.0, -1.0, 0.0])
    return PoseDecomposition(position=center, look_at=center + forward, up=up)


def recompose(dec: PoseDecomposition, template: Camera) -> Camera:
    """Rebuild a camera at the decomposed pose, intrinsics from template."""
    r_z = dec.look_at - dec.position
    r_z = r_z / np.linalg.norm(r_z)
    y0 = -dec.up
    r_y = y0 - np.dot(y0, r_z) * r_z
    n = np.linalg.norm(r_y)
    if n <= 1e-12:
        raise ValueError("up is parallel to the view direction")
    r_y = r_y / n
    r_x = np.cross(r_y, r_z)
    R = np.stack([r_x, r_y, r_z], axis=0)
    return Camera(
        K=template.K,
        R=R,
        t=-R @ dec.position,
        width=template.width,
        height=template.height,
        near=template.near,
        far=template.far,
    )


def interpolate(keys: list[Camera], cfg: TrajectoryConfig | None = None) -> list[Camera]:
    """Sample a smooth path through the key cameras.

    Output length is (len(keys) - 1) * samples_per_segment + 1 with the
    first and last samples equal to the first and last keys.  Intrinsics
    and clip planes interpolate linearly between keys.
    """
    cfg = cfg or TrajectoryConfig()
    if len(keys) < 2:
        raise ValueError(f"need at least 2 key cameras, got {len(keys)}")
    if any(k.width != keys[0].width or k.height != keys[0].height for k in keys):
        raise ValueError("all key cameras must share image dimensions")

    decs = [decompose(k) for k in keys]
    positions = np.stack([d.position for d in decs])
    look_ats = np.stack([d.look_at for d in decs])
    ups = np.stack([d.up for d in decs])
    Ks = np.stack([k.K for k in keys])
    nears = np.array([k.near for k in keys])
    fars = np.array([k.far for k in keys])

    n_out = (len(keys) - 1) * cfg.samples_per_segment + 1
    t = np.linspace(0.0, 1.0, n_out)

    pos_s = bspline_curve(positions, t, cfg.spline_degree)
    la_s = bspline_curve(look_ats, t, cfg.spline_degree)
    up_s = bspline_curve(ups, t, cfg.spline_degree)
    # Linear tracks for intrinsics and clips (exact when keys agree).
    seg = t * (len(keys) - 1)
    i0 = np.clip(np.floor(seg).astype(int), 0, len(keys) - 2)
    frac = seg - i0
    K_s = Ks[i0] * (1.0 - frac)[:, None, None] + Ks[i0 + 1] * frac[:, None, None]
    near_s = nears[i0] * (1.0 - frac) + nears[i0 + 1] * frac
    far_s = fars[i0] * (1.0 - frac) + fars[i0 + 1] * frac

    out = []
    for i in range(n_out):
        up_i = up_s[i]
        nrm = np.linalg.norm(up_i)
        if nrm <= 1e-12:
            raise ValueError(f"degenerate up vector at sample {i}")
        try:
            dec = PoseDecomposition(position=pos_s[i], look_at=la_s[i], up=up_i / nrm)
            template = Camera(
                K=K_s[i], R=keys[0].R, t=keys[0].t,
                width=keys[0].width, height=keys[0].height,
                near=float(near_s[i]), far=float(far_s[i]),
            )
            out.append(recompose(dec, template))
        except ValueError as e:
            raise ValueError(f"degenerate pose at sample {i}: {e}") from e
    return out
