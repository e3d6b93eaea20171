from .config import RasterConfig
from .normals import compute_normals
from .project import ProjectedArrays, project_arrays, project_splats
from .render import GPVideo, blend_pixels, render_gpbuffer, render_reference, render_trajectory

__all__ = [
    "GPVideo",
    "ProjectedArrays",
    "RasterConfig",
    "blend_pixels",
    "compute_normals",
    "project_arrays",
    "project_splats",
    "render_gpbuffer",
    "render_reference",
    "render_trajectory",
]
