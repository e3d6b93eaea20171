"""Refiner training: MSE on predicted flow velocities, Adam, dropout on
geometry modalities and context tokens."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from ..seeds import derive_seed
from ..simulate.dataset import load_manifest, load_sample
from ..simulate.pairs import PairedSample
from .checkpoint import save_checkpoint
from .model import RefinerConfig, RefinerModel
from .patchify import MODALITIES, encode, encode_gpbuffer, normalize_modality


@dataclass
class TrainConfig:
    steps: int = 5000
    batch: int = 1
    lr: float = 2e-3
    lr_final_frac: float = 0.05        # cosine decay floor, 1.0 = constant
    modality_dropout_p: float = 0.1
    context_dropout_p: float = 0.1
    seed: int = 0
    checkpoint_every: int = 0          # 0: only final
    checkpoint_dir: str | None = None
    ga_only: bool = False              # freeze backbone, train adapters
    model: RefinerConfig = field(default_factory=RefinerConfig)

    def __post_init__(self):
        if not (0.0 <= self.modality_dropout_p <= 1.0) or not (0.0 <= self.context_dropout_p <= 1.0):
            raise ValueError("dropout probabilities must be in [0, 1]")
        if self.steps < 1 or self.batch < 1:
            raise ValueError("steps and batch must be >= 1")
        if not (0.0 < self.lr_final_frac <= 1.0):
            raise ValueError("lr_final_frac must be in (0, 1]")


def _prepare_sample(sample: PairedSample, cfg: RefinerConfig):
    """Precompute (clean latent tokens, conditioning grid) for a sample."""
    clean_norm = normalize_modality("color", np.asarray(sample.clean.frames, dtype=np.float32), cfg.norm_near, cfg.norm_far)
    from ..core.types import VideoTensor  # local to avoid cycle at import time

    x1 = encode(VideoTensor(clean_norm), ps=cfg.ps, pt=cfg.pt)
    cond = encode_gpbuffer(sample.corrupted, ps=cfg.ps, pt=cfg.pt, near=cfg.norm_near, far=cfg.norm_far)
    if x1.grid != cond.grid:
        raise ValueError(f"clean/corrupted grids differ: {x1.grid} vs {cond.grid}")
    return x1, cond


def train(
    model: RefinerModel,
    samples: list[PairedSample] | str | Path,
    cfg: TrainConfig,
) -> tuple[RefinerModel, list[tuple[int, float]]]:
    """Train in place; returns (model, [(step, loss), ...]).

    `samples` is either a list of paired samples or a manifest path.
    Deterministic per cfg.seed (single-threaded torch assumed; the CLI
    pins thread counts).
    """
    if isinstance(samples, (str, Path)):
        manifest_path = Path(samples)
        manifest = load_manifest(manifest_path)
        base = manifest_path.parent
        samples = [load_sample(base / s["dir"]) for s in manifest["samples"]]
    if not samples:
        raise ValueError("need at least one training sample")

    mcfg = model.cfg
    if mcfg.grid is None:
        # Bind normalization and grid to the training data.
        first_cam = samples[0].cameras[0]
        mcfg.norm_near, mcfg.norm_far = first_cam.near, first_cam.far
        probe, _ = _prepare_sample(samples[0], mcfg)
        mcfg.grid = probe.grid

    prepared = [_prepare_sample(s, mcfg) for s in samples]
    grid = prepared[0][0].grid
    for x1, cond in prepared:
        if x1.grid != grid:
            raise ValueError("all training samples must share latent dims")
    n_tok = grid[0] * grid[1] * grid[2]
    c_lat = mcfg.latent_channels

    x1_all = torch.from_numpy(np.stack([p[0].tokens.reshape(n_tok, c_lat) for p in prepared]))
    cond_all = torch.from_numpy(np.stack([
        np.ascontiguousarray(p[1].tokens.transpose(3, 0, 1, 2), dtype=np.float32) for p in prepared
    ]))
    # Dropout zeroes one modality's channel block in the concatenated latent.
    c_mod = cond_all.shape[1] // len(MODALITIES)

    torch.manual_seed(derive_seed(cfg.seed, "train-torch"))
    rng = np.random.default_rng(derive_seed(cfg.seed, "train-np"))
    params = list(model.ga_parameters()) if cfg.ga_only else list(model.parameters())
    opt = torch.optim.Adam(params, lr=cfg.lr)

    model.train()
    log: list[tuple[int, float]] = []
    for step in range(cfg.steps):
        if cfg.lr_final_frac < 1.0:
            frac = 0.5 * (1.0 + np.cos(np.pi * step / max(cfg.steps - 1, 1)))
            lr_now = cfg.lr * (cfg.lr_final_frac + (1.0 - cfg.lr_final_frac) * frac)
            for group in opt.param_groups:
                group["lr"] = lr_now
        idx = rng.integers(0, len(prepared), size=cfg.batch)
        x1 = x1_all[idx]
        cond = cond_all[idx].clone()
        for b in range(cfg.batch):
            for mi in range(len(MODALITIES)):
                if rng.uniform() < cfg.modality_dropout_p:
                    cond[b, mi * c_mod:(mi + 1) * c_mod] = 0.0
        drop_ctx = bool(rng.uniform() < cfg.context_dropout_p)

        t = torch.from_numpy(rng.uniform(size=cfg.batch).astype(np.float32))
        x0 = torch.from_numpy(rng.standard_normal((cfg.batch, n_tok, c_lat)).astype(np.float32))
        x_t = t[:, None, None] * x1 + (1.0 - t[:, None, None]) * x0
        v_target = x1 - x0

        pred = model(x_t, t, grid, cond=cond, drop_context=drop_ctx)
        loss = torch.mean((pred - v_target) ** 2)
        if not torch.isfinite(loss):
            raise FloatingPointError(f"non-finite training loss at step {step}")
        opt.zero_grad()
        loss.backward()
        opt.step()
        log.append((step, float(loss.detach())))

        if cfg.checkpoint_every and cfg.checkpoint_dir and (step + 1) % cfg.checkpoint_every == 0:
            save_checkpoint(Path(cfg.checkpoint_dir) / f"step_{step + 1:07d}", model)

    return model, log
