"""Lossy PNG previews of buffer modalities (for eyeballs, not pipelines)."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from ..core.types import GPBuffer


def _to_u8(img: np.ndarray) -> np.ndarray:
    return np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8)


def _minmax(img: np.ndarray) -> np.ndarray:
    lo, hi = float(img.min()), float(img.max())
    if hi - lo < 1e-12:
        return np.zeros_like(img)
    return (img - lo) / (hi - lo)


def preview_arrays(buf: GPBuffer) -> dict[str, np.ndarray]:
    uncert = np.stack([_minmax(np.log1p(np.maximum(buf.uncertainty[..., c], 0.0))) for c in range(3)], axis=-1)
    return {
        "color": _to_u8(buf.color),
        "alpha": _to_u8(buf.alpha),
        "depth": _to_u8(_minmax(buf.depth)),
        "normal": _to_u8((buf.normal + 1.0) * 0.5),
        "uncert": _to_u8(uncert),
    }


def write_previews(out_dir: str | Path, buf: GPBuffer, stem: str, modalities: list[str] | None = None) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    arrays = preview_arrays(buf)
    written = []
    for name, arr in arrays.items():
        if modalities is not None and name not in modalities:
            continue
        path = out_dir / f"{stem}_{name}.png"
        Image.fromarray(arr).save(path)
        written.append(path)
    return written
