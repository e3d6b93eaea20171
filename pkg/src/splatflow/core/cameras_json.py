"""Camera list JSON serialization.

One object per frame, collected in a top-level array:

    {"w": int, "h": int, "K": [9 floats row-major],
     "w2c": [12 floats row-major R|t], "near": f, "far": f}
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .types import Camera


def camera_to_dict(cam: Camera) -> dict:
    w2c = np.hstack([cam.R, cam.t[:, None]])  # (3, 4)
    return {
        "w": cam.width,
        "h": cam.height,
        "K": [float(v) for v in cam.K.reshape(-1)],
        "w2c": [float(v) for v in w2c.reshape(-1)],
        "near": float(cam.near),
        "far": float(cam.far),
    }


def camera_from_dict(d: dict) -> Camera:
    w2c = np.asarray(d["w2c"], dtype=np.float64).reshape(3, 4)
    return Camera(
        K=np.asarray(d["K"], dtype=np.float64).reshape(3, 3),
        R=w2c[:, :3],
        t=w2c[:, 3],
        width=int(d["w"]),
        height=int(d["h"]),
        near=float(d["near"]),
        far=float(d["far"]),
    )


def save_cameras(path: str | Path, cams: list[Camera]) -> None:
    Path(path).write_text(json.dumps([camera_to_dict(c) for c in cams], indent=1))


def load_cameras(path: str | Path) -> list[Camera]:
    data = json.loads(Path(path).read_text())
    if not isinstance(data, list):
        raise ValueError(f"{path}: expected a JSON array of camera objects")
    return [camera_from_dict(d) for d in data]
