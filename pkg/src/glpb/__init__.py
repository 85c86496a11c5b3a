"""Pyramid-based image blending and balanced dataset augmentation."""

__version__ = "0.1.0"

from .errors import (
    DecodeError,
    DimMismatch,
    GlpbError,
    InsufficientPatients,
    TargetDimMismatch,
    TooManyLevels,
    UnassignedPatient,
    UnreadableRoot,
)
from .pyramid import (
    BINOMIAL_KERNEL,
    GaussianPyramid,
    Image,
    Kernel,
    LaplacianPyramid,
    build_gaussian,
    build_laplacian,
    collapse,
    default_levels,
    expand,
    max_levels,
    reduce,
)
from .blend import (
    BlendMask,
    BlendSpec,
    direct_blend,
    make_half_mask,
    make_ramp_mask,
    mix_blend,
    pyramid_blend,
    seam_energy,
)
from .imgio import load_image, save_image

__all__ = [
    "__version__",
    "GlpbError",
    "DecodeError",
    "DimMismatch",
    "TargetDimMismatch",
    "TooManyLevels",
    "InsufficientPatients",
    "UnassignedPatient",
    "UnreadableRoot",
    "Image",
    "Kernel",
    "GaussianPyramid",
    "LaplacianPyramid",
    "BINOMIAL_KERNEL",
    "reduce",
    "expand",
    "build_gaussian",
    "build_laplacian",
    "collapse",
    "default_levels",
    "max_levels",
    "BlendMask",
    "BlendSpec",
    "make_half_mask",
    "make_ramp_mask",
    "direct_blend",
    "mix_blend",
    "pyramid_blend",
    "seam_energy",
    "load_image",
    "save_image",
]
