from .dataset import build_dataset, load_manifest, load_sample, save_sample
from .degrade import corrupt_feedforward, sparse_subset
from .pairs import DESK_CORRUPT_ITERS, PairedSample, SimConfig, generate_pair, init_cloud
from .scene import make_scene

__all__ = [
    "DESK_CORRUPT_ITERS",
    "PairedSample",
    "SimConfig",
    "build_dataset",
    "corrupt_feedforward",
    "generate_pair",
    "init_cloud",
    "load_manifest",
    "load_sample",
    "make_scene",
    "save_sample",
    "sparse_subset",
]
