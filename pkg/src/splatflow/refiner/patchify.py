"""Lossless patchify encoder standing in for a video VAE.

encode/decode are pure reshape/transpose, so the round trip is bitwise
exact for every modality (a real RGB VAE loses up to ~19% MAE on
normals; this substitution removes that error entirely while keeping
the latent geometry: spatial /8, temporal /4, channels stacked).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.types import VideoTensor
from ..raster.render import GPVideo

MODALITIES = ("color", "alpha", "depth", "normal", "uncertainty")


@dataclass(frozen=True)
class LatentVideo:
    """Token grid (T/pt, H/ps, W/ps, C_lat) with its patch factors."""

    tokens: np.ndarray
    ps: int
    pt: int

    def __post_init__(self):
        tokens = np.asarray(self.tokens)
        if tokens.ndim != 4:
            raise ValueError(f"tokens must be rank 4, got shape {tokens.shape}")
        object.__setattr__(self, "tokens", tokens)

    @property
    def grid(self) -> tuple[int, int, int]:
        return self.tokens.shape[0], self.tokens.shape[1], self.tokens.shape[2]

    @property
    def channels(self) -> int:
        return self.tokens.shape[3]


def encode(video: VideoTensor, ps: int = 8, pt: int = 4) -> LatentVideo:
    t, h, w, c = video.shape
    if t % pt or h % ps or w % ps:
        raise ValueError(f"video dims {t}x{h}x{w} not divisible by pt={pt}, ps={ps}")
    f = video.frames
    tokens = (
        f.reshape(t // pt, pt, h // ps, ps, w // ps, ps, c)
        .transpose(0, 2, 4, 1, 3, 5, 6)
        .reshape(t // pt, h // ps, w // ps, pt * ps * ps * c)
    )
    return LatentVideo(tokens=np.ascontiguousarray(tokens), ps=ps, pt=pt)


def decode(latent: LatentVideo, channels: int = 3) -> VideoTensor:
    tt, hh, ww, cl = latent.tokens.shape
    ps, pt = latent.ps, latent.pt
    if cl != pt * ps * ps * channels:
        raise ValueError(f"latent channels {cl} != pt*ps*ps*C for C={channels}")
    frames = (
        latent.tokens.reshape(tt, hh, ww, pt, ps, ps, channels)
        .transpose(0, 3, 1, 4, 2, 5, 6)
        .reshape(tt * pt, hh * ps, ww * ps, channels)
    )
    return VideoTensor(np.ascontiguousarray(frames))


def normalize_modality(name: str, frames: np.ndarray, near: float, far: float) -> np.ndarray:
    """Map a modality into [-1, 1] before encoding."""
    if name in ("color", "alpha"):
        return 2.0 * frames - 1.0
    if name == "depth":
        return 2.0 * (frames - near) / (far - near) - 1.0
    if name == "normal":
        return frames  # unit vectors are already componentwise in [-1, 1]
    if name == "uncertainty":
        return frames / (1.0 + np.abs(frames))  # compressive, sign-preserving
    raise ValueError(f"unknown modality {name!r}")


def _to_3ch(frames: np.ndarray) -> np.ndarray:
    if frames.shape[-1] == 3:
        return frames
    if frames.shape[-1] == 1:
        return np.repeat(frames, 3, axis=-1)
    raise ValueError(f"modalities must have 1 or 3 channels, got {frames.shape[-1]}")


def encode_gpbuffer(
    gp: GPVideo,
    ps: int = 8,
    pt: int = 4,
    near: float = 0.2,
    far: float = 30.0,
    drop: dict[str, bool] | None = None,
) -> LatentVideo:
    """Per-modality encode, then channel-wise concat into one latent.

    Every modality is normalized to [-1, 1], expanded to 3 channels so
    each contributes the same latent width, and patchified; dropped
    modalities are replaced by zeros.  Output channels: 5 * 3*ps*ps*pt.
    """
    drop = drop or {}
    parts = []
    grid = None
    for name in MODALITIES:
        vid: VideoTensor = getattr(gp, name)
        norm = normalize_modality(name, np.asarray(vid.frames, dtype=np.float32), near, far)
        lat = encode(VideoTensor(_to_3ch(norm)), ps=ps, pt=pt)
        if grid is None:
            grid = lat.grid
        elif lat.grid != grid:
            raise ValueError(f"modality {name} grid {lat.grid} != {grid}")
        tokens = np.zeros_like(lat.tokens) if drop.get(name, False) else lat.tokens
        parts.append(tokens)
    return LatentVideo(tokens=np.concatenate(parts, axis=-1), ps=ps, pt=pt)
