"""Checkpoints: one GPBT tensor per parameter plus a JSON config."""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np
import torch

from ..core.tensorio import read_tensor, write_tensor
from .model import RefinerConfig, RefinerModel


def save_checkpoint(ckpt_dir: str | Path, model: RefinerModel) -> Path:
    ckpt_dir = Path(ckpt_dir)
    (ckpt_dir / "params").mkdir(parents=True, exist_ok=True)
    cfg = asdict(model.cfg)
    cfg["grid"] = list(model.cfg.grid) if model.cfg.grid is not None else None
    (ckpt_dir / "config.json").write_text(json.dumps(cfg, indent=1))
    for name, tensor in model.state_dict().items():
        arr = tensor.detach().cpu().numpy().astype(np.float32)
        if arr.ndim == 0:
            arr = arr.reshape(1)
        write_tensor(ckpt_dir / "params" / (name.replace(".", "__") + ".gpbt"), arr)
    return ckpt_dir


def load_checkpoint(ckpt_dir: str | Path) -> RefinerModel:
    ckpt_dir = Path(ckpt_dir)
    cfg_dict = json.loads((ckpt_dir / "config.json").read_text())
    if cfg_dict.get("grid") is not None:
        cfg_dict["grid"] = tuple(cfg_dict["grid"])
    cfg = RefinerConfig(**cfg_dict)
    model = RefinerModel(cfg)
    state = {}
    for name, tensor in model.state_dict().items():
        path = ckpt_dir / "params" / (name.replace(".", "__") + ".gpbt")
        arr = read_tensor(path)
        state[name] = torch.from_numpy(arr.reshape(tensor.shape)).to(tensor.dtype)
    model.load_state_dict(state)
    return model
