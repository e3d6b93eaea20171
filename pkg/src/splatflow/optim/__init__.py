from .adam import Adam
from .fit import FitConfig, FitDivergence, LearningRates, fit, merge_views
from .grad import GradBuffer, render_color_backward, render_color_forward, render_color_with_grad
from .losses import loss_l1_dssim, loss_terms
from .ssim import ssim, ssim_with_grad

__all__ = [
    "Adam",
    "FitConfig",
    "FitDivergence",
    "GradBuffer",
    "LearningRates",
    "fit",
    "loss_l1_dssim",
    "loss_terms",
    "merge_views",
    "render_color_backward",
    "render_color_forward",
    "render_color_with_grad",
    "ssim",
    "ssim_with_grad",
]
