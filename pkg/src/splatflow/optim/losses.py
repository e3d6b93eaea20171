"""Photometric loss: (1 - lambda) * L1 + lambda * D-SSIM."""

from __future__ import annotations

import numpy as np

from .ssim import ssim_with_grad


def loss_terms(
    pred: np.ndarray,
    target: np.ndarray,
    lam: float,
    window: int = 11,
    sigma: float = 1.5,
) -> tuple[float, float, float, np.ndarray]:
    """Returns (loss, l1, dssim, dloss/dpred)."""
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    if not (0.0 <= lam <= 1.0):
        raise ValueError(f"lambda must be in [0, 1], got {lam}")
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)

    diff = pred - target
    l1 = float(np.abs(diff).mean())
    grad = (1.0 - lam) * np.sign(diff) / diff.size

    if lam > 0.0:
        s, ds = ssim_with_grad(pred, target, window, sigma)
        dssim = (1.0 - s) / 2.0
        grad = grad + lam * (-0.5) * ds
    else:
        dssim = 0.0

    loss = (1.0 - lam) * l1 + lam * dssim
    return loss, l1, dssim, grad


def loss_l1_dssim(
    pred: np.ndarray,
    target: np.ndarray,
    lam: float,
    window: int = 11,
    sigma: float = 1.5,
) -> tuple[float, np.ndarray]:
    loss, _, _, grad = loss_terms(pred, target, lam, window, sigma)
    return loss, grad
