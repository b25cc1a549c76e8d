"""orbview: mirror-ball captures to corrected panoramas and merged live views."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .projection import (
    BallGeometry,
    DiskPoint,
    FovAlpha,
    ReflectionRay,
    SurfaceNormal,
    alpha_from_geometry,
    classical_forward,
    defined_region,
    improved_forward,
    improved_inverse,
    reflect,
)
from .raster import RasterImage
from .remap import (
    BallCircle,
    BallView,
    EquirectSpec,
    RemapTable,
    VirtualCamera,
    build_equirect_table,
    build_pinhole_table,
    build_table,
    resample,
)
from .registration import (
    BlendPolicy,
    Correspondence,
    Rig,
    RigSource,
    estimate_rotation,
    merge_views,
    rays_from_correspondences,
)
from .rotation import Rotation3
from .render import ViewState

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BallCircle",
    "BallGeometry",
    "BallView",
    "BlendPolicy",
    "Correspondence",
    "DiskPoint",
    "EquirectSpec",
    "FovAlpha",
    "KERNEL_BACKEND",
    "RasterImage",
    "ReflectionRay",
    "RemapTable",
    "Rig",
    "RigSource",
    "Rotation3",
    "SurfaceNormal",
    "ViewState",
    "VirtualCamera",
    "alpha_from_geometry",
    "build_equirect_table",
    "build_pinhole_table",
    "build_table",
    "classical_forward",
    "defined_region",
    "estimate_rotation",
    "improved_forward",
    "improved_inverse",
    "merge_views",
    "rays_from_correspondences",
    "reflect",
    "resample",
]
