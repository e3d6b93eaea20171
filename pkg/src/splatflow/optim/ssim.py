"""SSIM with an analytic input gradient.

Gaussian-window SSIM on [0, 1] images, constants C1 = 0.01^2 and
C2 = 0.03^2, channels scored independently and averaged.  Filtering is
'same'-size with zero padding, which makes the filter self-adjoint, so
backprop through every local statistic is another pass of the same
filter.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import correlate1d

C1 = 0.01 ** 2
C2 = 0.03 ** 2


def _gauss_kernel(window: int, sigma: float) -> np.ndarray:
    r = np.arange(window, dtype=np.float64) - (window - 1) / 2.0
    k = np.exp(-0.5 * (r / sigma) ** 2)
    return k / k.sum()


def _filt(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    out = correlate1d(img, kernel, axis=0, mode="constant", cval=0.0)
    return correlate1d(out, kernel, axis=1, mode="constant", cval=0.0)


def ssim(x: np.ndarray, y: np.ndarray, window: int = 11, sigma: float = 1.5) -> float:
    return ssim_with_grad(x, y, window, sigma)[0]


def ssim_with_grad(
    x: np.ndarray, y: np.ndarray, window: int = 11, sigma: float = 1.5
) -> tuple[float, np.ndarray]:
    """Mean SSIM and its gradient with respect to x."""
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    if window % 2 != 1:
        raise ValueError("window must be odd")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    in_shape = x.shape
    if x.ndim == 2:
        x = x[..., None]
        y = y[..., None]
    k = _gauss_kernel(window, sigma)

    mu_x = _filt(x, k)
    mu_y = _filt(y, k)
    vx = _filt(x * x, k) - mu_x * mu_x
    vy = _filt(y * y, k) - mu_y * mu_y
    vxy = _filt(x * y, k) - mu_x * mu_y

    a1 = 2.0 * mu_x * mu_y + C1
    a2 = 2.0 * vxy + C2
    b1 = mu_x * mu_x + mu_y * mu_y + C1
    b2 = vx + vy + C2
    s = (a1 * a2) / (b1 * b2)
    mean_s = float(s.mean())

    # Mean over all pixels and channels.
    wgt = 1.0 / s.size
    d_mu = wgt * 2.0 * (mu_y * a2 * b1 - mu_x * a1 * a2) / (b1 * b1 * b2)
    d_vx = wgt * (-a1 * a2) / (b1 * b2 * b2)
    d_vxy = wgt * 2.0 * a1 / (b1 * b2)

    grad = _filt(d_mu - 2.0 * mu_x * d_vx - mu_y * d_vxy, k)
    grad += 2.0 * x * _filt(d_vx, k)
    grad += y * _filt(d_vxy, k)
    return mean_s, grad.reshape(in_shape)
