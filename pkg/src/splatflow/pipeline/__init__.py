from .metrics import EvalReport, evaluate, psnr, ssim
from .update import ModelRefiner, OracleRefiner, PipelineStageError, UpdateConfig, reconstruct_update

__all__ = [
    "EvalReport",
    "ModelRefiner",
    "OracleRefiner",
    "PipelineStageError",
    "UpdateConfig",
    "evaluate",
    "psnr",
    "reconstruct_update",
    "ssim",
]
