from .cameras_json import camera_from_dict, camera_to_dict, load_cameras, save_cameras
from .plyio import PlyParseError, PlySchemaError, load_ply, write_ply
from .pose import quat_to_rotmat, quats_to_rotmats, se3_compose, se3_identity, se3_inverse
from .tensorio import TensorFormatError, read_tensor, write_tensor
from .types import Camera, GaussianCloud, GPBuffer, ProjectedSplat, VideoTensor, logit, sigmoid

__all__ = [
    "Camera",
    "GaussianCloud",
    "GPBuffer",
    "ProjectedSplat",
    "VideoTensor",
    "PlyParseError",
    "PlySchemaError",
    "TensorFormatError",
    "camera_from_dict",
    "camera_to_dict",
    "load_cameras",
    "load_ply",
    "logit",
    "quat_to_rotmat",
    "quats_to_rotmats",
    "read_tensor",
    "save_cameras",
    "se3_compose",
    "se3_identity",
    "se3_inverse",
    "sigmoid",
    "write_ply",
    "write_tensor",
]
