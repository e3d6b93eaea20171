"""Domain value types shared by every stage of the pipeline.

All types here are immutable after construction and safe to share
read-only across workers.  Raw splat parameters are stored in
unconstrained space (logit opacity, log scale) so optimizers never have
to handle constraints explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# (L+1)^2 spherical-harmonics basis sizes for degrees 0..3.
SH_BASIS_SIZES = (1, 4, 9, 16)


def sigmoid(x: np.ndarray | float) -> np.ndarray:
    """Numerically stable logistic function."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def logit(p: np.ndarray | float) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    return np.log(p) - np.log1p(-p)


def _as_f64(a, shape_hint: str) -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.size and not np.isfinite(arr).all():
        raise ValueError(f"non-finite values in {shape_hint}")
    return arr


@dataclass(frozen=True)
class GaussianCloud:
    """Explicit splat scene: N anisotropic Gaussian primitives.

    positions      (N, 3) world-space means
    opacities_raw  (N,)   pre-sigmoid opacity
    sh_coeffs      (N, B, 3) SH coefficients, B = (L+1)^2, degree L in 0..3
    scales_raw     (N, 3) pre-exponential (log) scales
    rotations      (N, 4) unit quaternions, (w, x, y, z) order
    """

    positions: np.ndarray
    opacities_raw: np.ndarray
    sh_coeffs: np.ndarray
    scales_raw: np.ndarray
    rotations: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "positions", _as_f64(self.positions, "positions").reshape(-1, 3))
        n = self.positions.shape[0]
        object.__setattr__(self, "opacities_raw", _as_f64(self.opacities_raw, "opacities_raw").reshape(n))
        sh = _as_f64(self.sh_coeffs, "sh_coeffs")
        if sh.ndim != 3 or sh.shape[0] != n or sh.shape[2] != 3:
            raise ValueError(f"sh_coeffs must be (N, B, 3), got {sh.shape}")
        if sh.shape[1] not in SH_BASIS_SIZES:
            raise ValueError(f"SH basis size {sh.shape[1]} not in {SH_BASIS_SIZES}")
        object.__setattr__(self, "sh_coeffs", sh)
        object.__setattr__(self, "scales_raw", _as_f64(self.scales_raw, "scales_raw").reshape(n, 3))
        rot = _as_f64(self.rotations, "rotations").reshape(n, 4)
        norms = np.linalg.norm(rot, axis=1)
        if n and (norms < 1e-12).any():
            raise ValueError("zero quaternion in rotations")
        object.__setattr__(self, "rotations", rot)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def sh_degree(self) -> int:
        return SH_BASIS_SIZES.index(self.sh_coeffs.shape[1])

    def opacities(self) -> np.ndarray:
        return sigmoid(self.opacities_raw)

    def scales(self) -> np.ndarray:
        return np.exp(self.scales_raw)

    def unit_rotations(self) -> np.ndarray:
        return self.rotations / np.linalg.norm(self.rotations, axis=1, keepdims=True)

    def extent(self) -> float:
        """Diagonal of the positions bounding box (0 for empty/degenerate)."""
        if self.n == 0:
            return 0.0
        span = self.positions.max(axis=0) - self.positions.min(axis=0)
        return float(np.linalg.norm(span))

    def replace(self, **kwargs) -> "GaussianCloud":
        fields = dict(
            positions=self.positions,
            opacities_raw=self.opacities_raw,
            sh_coeffs=self.sh_coeffs,
            scales_raw=self.scales_raw,
            rotations=self.rotations,
        )
        fields.update(kwargs)
        return GaussianCloud(**fields)


@dataclass(frozen=True)
class Camera:
    """Pinhole camera: world-to-camera pose plus intrinsics.

    Convention: camera looks along +z, image y increases downward, so the
    camera 'up' direction in world space is -R^T e_y.
    """

    K: np.ndarray  # (3, 3) intrinsics, pixels
    R: np.ndarray  # (3, 3) world-to-camera rotation
    t: np.ndarray  # (3,)   world-to-camera translation
    width: int
    height: int
    near: float = 0.01
    far: float = 100.0

    def __post_init__(self):
        K = _as_f64(self.K, "K").reshape(3, 3)
        R = _as_f64(self.R, "R").reshape(3, 3)
        t = _as_f64(self.t, "t").reshape(3)
        if not (K[1, 0] == 0 and K[2, 0] == 0 and K[2, 1] == 0):
            raise ValueError("K must be upper-triangular")
        if K[0, 0] <= 0 or K[1, 1] <= 0:
            raise ValueError("focal lengths must be positive")
        if abs(np.linalg.det(R) - 1.0) > 1e-6 or np.abs(R @ R.T - np.eye(3)).max() > 1e-6:
            raise ValueError("R must be a rotation (orthonormal, det +1)")
        if not (0.0 < self.near < self.far):
            raise ValueError(f"need 0 < near < far, got near={self.near} far={self.far}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "t", t)

    @property
    def fx(self) -> float:
        return float(self.K[0, 0])

    @property
    def fy(self) -> float:
        return float(self.K[1, 1])

    @property
    def cx(self) -> float:
        return float(self.K[0, 2])

    @property
    def cy(self) -> float:
        return float(self.K[1, 2])

    def center(self) -> np.ndarray:
        """Camera center in world coordinates (-R^T t)."""
        return -self.R.T @ self.t

    def world_to_cam(self, points: np.ndarray) -> np.ndarray:
        return points @ self.R.T + self.t

    def sees(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask: point projects inside the image within [near, far]."""
        pc = self.world_to_cam(np.atleast_2d(points))
        z = pc[:, 2]
        ok = (z > self.near) & (z < self.far)
        with np.errstate(divide="ignore", invalid="ignore"):
            u = self.fx * pc[:, 0] / z + self.cx
            v = self.fy * pc[:, 1] / z + self.cy
        ok &= (u >= 0) & (u < self.width) & (v >= 0) & (v < self.height)
        return ok


@dataclass(frozen=True)
class GPBuffer:
    """Per-frame multi-modal render stack.

    color        (H, W, 3) in [0, 1]
    alpha        (H, W)    accumulated opacity in [0, 1]
    depth        (H, W)    expected depth, world units, 0 where alpha == 0
    normal       (H, W, 3) camera-space unit normals, 0 where invalid
    uncertainty  (H, W, 3) alpha-blended inverse-covariance elements (a, b, c)
    """

    color: np.ndarray
    alpha: np.ndarray
    depth: np.ndarray
    normal: np.ndarray
    uncertainty: np.ndarray

    def __post_init__(self):
        color = _as_f64(self.color, "color")
        h, w = color.shape[:2]
        object.__setattr__(self, "color", color.reshape(h, w, 3))
        object.__setattr__(self, "alpha", _as_f64(self.alpha, "alpha").reshape(h, w))
        object.__setattr__(self, "depth", _as_f64(self.depth, "depth").reshape(h, w))
        object.__setattr__(self, "normal", _as_f64(self.normal, "normal").reshape(h, w, 3))
        object.__setattr__(self, "uncertainty", _as_f64(self.uncertainty, "uncertainty").reshape(h, w, 3))

    @property
    def shape(self) -> tuple[int, int]:
        return self.color.shape[0], self.color.shape[1]


@dataclass(frozen=True)
class VideoTensor:
    """Frame stack (T, H, W, C).  frame_rate is informational only."""

    frames: np.ndarray
    frame_rate: float = 30.0

    def __post_init__(self):
        frames = np.asarray(self.frames)
        if frames.ndim != 4:
            raise ValueError(f"frames must be (T, H, W, C), got shape {frames.shape}")
        if frames.shape[0] < 1:
            raise ValueError("need at least one frame")
        object.__setattr__(self, "frames", frames)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return tuple(self.frames.shape)  # type: ignore[return-value]


@dataclass(frozen=True)
class ProjectedSplat:
    """One splat after projection to a camera's image plane.

    cov2d / inv_cov2d hold the unique elements (xx, xy, yy) of the floored
    2D covariance and its exact inverse.  radius_px bounds the splat's
    image footprint (3 sigma of the major axis).
    """

    mean2d: np.ndarray
    cov2d: tuple[float, float, float]
    inv_cov2d: tuple[float, float, float]
    depth_cam: float
    color_eval: np.ndarray
    opacity: float
    radius_px: float
    index: int = field(default=-1)
