"""SE(3) and quaternion helpers.

Poses are (R, t) pairs mapping world points to camera/local frames:
x_local = R @ x_world + t.
"""

from __future__ import annotations

import numpy as np


def se3_compose(a: tuple[np.ndarray, np.ndarray], b: tuple[np.ndarray, np.ndarray]):
    """Compose two SE(3) transforms: (a ∘ b)(x) = a(b(x))."""
    Ra, ta = a
    Rb, tb = b
    return Ra @ Rb, Ra @ tb + ta


def se3_inverse(a: tuple[np.ndarray, np.ndarray]):
    R, t = a
    return R.T, -(R.T @ t)


def se3_identity():
    return np.eye(3), np.zeros(3)


def quat_to_rotmat(q: np.ndarray) -> np.ndarray:
    """Rotation matrix from a (w, x, y, z) quaternion.

    Normalizes defensively; the double cover q -> -q maps to the same
    matrix exactly.
    """
    q = np.asarray(q, dtype=np.float64).reshape(4)
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise ValueError("zero quaternion has no rotation")
    w, x, y, z = q / n
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quats_to_rotmats(q: np.ndarray) -> np.ndarray:
    """Batched quat_to_rotmat: (N, 4) -> (N, 3, 3)."""
    q = np.asarray(q, dtype=np.float64).reshape(-1, 4)
    n = np.linalg.norm(q, axis=1, keepdims=True)
    if (n < 1e-12).any():
        raise ValueError("zero quaternion has no rotation")
    w, x, y, z = (q / n).T
    R = np.empty((q.shape[0], 3, 3))
    R[:, 0, 0] = 1 - 2 * (y * y + z * z)
    R[:, 0, 1] = 2 * (x * y - w * z)
    R[:, 0, 2] = 2 * (x * z + w * y)
    R[:, 1, 0] = 2 * (x * y + w * z)
    R[:, 1, 1] = 1 - 2 * (x * x + z * z)
    R[:, 1, 2] = 2 * (y * z - w * x)
    R[:, 2, 0] = 2 * (x * z - w * y)
    R[:, 2, 1] = 2 * (y * z + w * x)
    R[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return R
