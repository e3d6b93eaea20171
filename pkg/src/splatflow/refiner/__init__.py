from .checkpoint import load_checkpoint, save_checkpoint
from .flow import euler_integrate, fm_sample_training_tuple, generate
from .model import GABlock, DiTBlock, RefinerConfig, RefinerModel, factorized_pos_embed
from .patchify import LatentVideo, MODALITIES, decode, encode, encode_gpbuffer, normalize_modality
from .refine import refine_video
from .train import TrainConfig, train

__all__ = [
    "DiTBlock",
    "GABlock",
    "LatentVideo",
    "MODALITIES",
    "RefinerConfig",
    "RefinerModel",
    "TrainConfig",
    "decode",
    "encode",
    "encode_gpbuffer",
    "euler_integrate",
    "factorized_pos_embed",
    "fm_sample_training_tuple",
    "generate",
    "load_checkpoint",
    "normalize_modality",
    "refine_video",
    "save_checkpoint",
    "train",
]
