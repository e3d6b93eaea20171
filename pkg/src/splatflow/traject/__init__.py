from .spline import bspline_curve, clamped_knots
from .trajectory import PoseDecomposition, TrajectoryConfig, decompose, interpolate, recompose

__all__ = [
    "PoseDecomposition",
    "TrajectoryConfig",
    "bspline_curve",
    "clamped_knots",
    "decompose",
    "interpolate",
    "recompose",
]
