"""Clamped uniform B-spline evaluation on vector-valued control points."""

from __future__ import annotations

import numpy as np
from scipy.interpolate import BSpline


def clamped_knots(n_controls: int, degree: int) -> np.ndarray:
    """Clamped uniform knot vector on [0, 1] for n controls of given degree.

    End knots repeat degree+1 times so the curve interpolates the first
    and last control points exactly.
    """
    if n_controls < degree + 1:
        raise ValueError(f"need at least degree+1={degree + 1} controls, got {n_controls}")
    interior = n_controls - degree - 1
    inner = np.linspace(0.0, 1.0, interior + 2)[1:-1] if interior > 0 else np.array([])
    return np.concatenate([np.zeros(degree + 1), inner, np.ones(degree + 1)])


def bspline_curve(controls: np.ndarray, params: np.ndarray, degree: int = 3) -> np.ndarray:
    """Evaluate the clamped uniform B-spline through `controls` at `params`.

    Degree degrades to n_controls - 1 when there are too few controls,
    so 2 keys give the linear segment and 3 give a quadratic.
    """
    controls = np.asarray(controls, dtype=np.float64)
    n = controls.shape[0]
    deg = min(degree, n - 1)
    if deg < 1:
        raise ValueError("need at least 2 control points")
    knots = clamped_knots(n, deg)
    spl = BSpline(knots, controls, deg, extrapolate=False)
    t = np.clip(np.asarray(params, dtype=np.float64), 0.0, 1.0)
    return spl(t)
