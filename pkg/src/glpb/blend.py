"""Compositing two images: hard cut, linear transition, and pyramid blending.

All three methods share one per-pixel interpolation kernel
``out = (1 - r) * a + r * b`` where the mask r is 0 where image A wins and
1 where image B wins.  They differ only in where the mask softness comes
from: nowhere (direct), a linear ramp in image space (mix), or the mask's
own Gaussian pyramid applied across the Laplacian bands of both images
(pyramid blend), which is what removes the visible seam without washing
out detail.

Outputs are returned unclamped; encode-time clamping lives in imgio.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch
from .pyramid import (
    BINOMIAL_KERNEL,
    Image,
    Kernel,
    LaplacianPyramid,
    build_gaussian,
    build_laplacian,
    collapse,
)

__all__ = [
    "BlendMask",
    "BlendSpec",
    "make_half_mask",
    "make_ramp_mask",
    "direct_blend",
    "mix_blend",
    "pyramid_blend",
    "seam_energy",
]

VERTICAL = "vertical"  # seam runs down the image: left/right halves
HORIZONTAL = "horizontal"  # seam runs across: top/bottom halves

METHODS = ("direct", "mix", "glpb")
MASK_KINDS = ("half_vertical", "half_horizontal", "custom")


@dataclass(frozen=True)
class BlendMask:
    """Single-channel selection mask: 0 picks image A, 1 picks image B."""

    mask: Image

    def __post_init__(self):
        if self.mask.channels != 1:
            raise ValueError(f"mask must be single-channel, got {self.mask.channels}")
        vals = self.mask.planes
        if float(vals.min()) < 0.0 or float(vals.max()) > 1.0:
            raise ValueError("mask values must lie in [0, 1]")

    @property
    def width(self) -> int:
        return self.mask.width

    @property
    def height(self) -> int:
        return self.mask.height


@dataclass(frozen=True)
class BlendSpec:
    """How a pair of images should be composited."""

    method: str = "glpb"
    mask_kind: str = "half_vertical"
    transition_width: int = 0  # mix only
    n_levels: int | None = None  # glpb only; None picks default_levels

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}, expected one of {METHODS}")
        if self.mask_kind not in MASK_KINDS:
            raise ValueError(f"unknown mask kind {self.mask_kind!r}, expected one of {MASK_KINDS}")
        if self.transition_width < 0:
            raise ValueError("transition_width must be >= 0")


def _check_dims(a: Image, b: Image, mask: BlendMask | None = None) -> None:
    if (a.width, a.height) != (b.width, b.height):
        raise DimMismatch(f"images differ in size: {a.width}x{a.height} vs {b.width}x{b.height}")
    if a.channels != b.channels:
        raise DimMismatch(f"images differ in channels: {a.channels} vs {b.channels}")
    if mask is not None and (mask.width, mask.height) != (a.width, a.height):
        raise DimMismatch(
            f"mask size {mask.width}x{mask.height} does not match images {a.width}x{a.height}"
        )


def _lerp(a: np.ndarray, b: np.ndarray, r: np.ndarray) -> np.ndarray:
    # Shared by direct_blend and every pyramid level so that a 0-level
    # pyramid blend reproduces direct blending bit for bit.
    return (1.0 - r) * a + r * b


def make_half_mask(width: int, height: int, orientation: str = VERTICAL) -> BlendMask:
    """Binary mask selecting A on one half and B on the other.

    Vertical orientation zeroes columns [0, floor(w/2)) and sets the rest;
    horizontal does the same on rows.
    """
    arr = np.zeros((1, height, width), dtype=np.float32)
    if orientation == VERTICAL:
        arr[:, :, width // 2 :] = 1.0
    elif orientation == HORIZONTAL:
        arr[:, height // 2 :, :] = 1.0
    else:
        raise ValueError(f"unknown orientation {orientation!r}")
    return BlendMask(Image(arr))


def make_ramp_mask(width: int, height: int, orientation: str, transition_width: int) -> BlendMask:
    """Mask that ramps 0 to 1 linearly over a centered band of the given width.

    With transition_width 0 this degenerates to exactly the half mask.
    Pixel centers sit at x + 0.5, so a full-width ramp puts the two middle
    columns of an even-width image at 0.5 -/+ 1/(2*width).
    """
    span = width if orientation == VERTICAL else height
    if orientation not in (VERTICAL, HORIZONTAL):
        raise ValueError(f"unknown orientation {orientation!r}")
    if not 0 <= transition_width <= span:
        raise ValueError(f"transition width {transition_width} outside [0, {span}]")
    centers = np.arange(span, dtype=np.float32) + 0.5
    if transition_width == 0:
        weights = (centers >= span / 2.0).astype(np.float32)
    else:
        weights = np.clip((centers - span / 2.0) / transition_width + 0.5, 0.0, 1.0).astype(np.float32)
    if orientation == VERTICAL:
        arr = np.broadcast_to(weights[None, None, :], (1, height, width))
    else:
        arr = np.broadcast_to(weights[None, :, None], (1, height, width))
    return BlendMask(Image(np.ascontiguousarray(arr)))


def direct_blend(a: Image, b: Image, mask: BlendMask) -> Image:
    """Per-pixel interpolation under the mask; with a binary half mask this
    is plain concatenation of the two halves, hard seam included."""
    _check_dims(a, b, mask)
    return Image(_lerp(a.planes, b.planes, mask.mask.planes))


def mix_blend(a: Image, b: Image, orientation: str = VERTICAL, transition_width: int = 0) -> Image:
    """Half-and-half composite with a linear cross-fade across a centered band.

    Outside the band the output equals a (0-side) or b (1-side); inside,
    the weight ramps linearly.  Equivalent to direct_blend with a ramp mask.
    """
    _check_dims(a, b)
    ramp = make_ramp_mask(a.width, a.height, orientation, transition_width)
    return direct_blend(a, b, ramp)


def pyramid_blend(
    a: Image,
    b: Image,
    mask: BlendMask,
    kernel: Kernel = BINOMIAL_KERNEL,
    n_levels: int = 0,
) -> Image:
    """Blend the Laplacian bands of a and b under the Gaussian pyramid of the mask.

    Builds both band stacks and the mask pyramid, interpolates every level
    pairwise (the residual top level included, so an all-0 or all-1 mask
    returns a or b), and collapses the result back to full resolution.
    With n_levels 0 there are no bands and this equals direct_blend exactly.
    """
    _check_dims(a, b, mask)
    la = build_laplacian(a, kernel, n_levels)
    lb = build_laplacian(b, kernel, n_levels)
    rg = build_gaussian(mask.mask, kernel, n_levels)
    bands = [
        Image(_lerp(ba.planes, bb.planes, r.planes))
        for ba, bb, r in zip(la.band_levels, lb.band_levels, rg.levels)
    ]
    top = Image(_lerp(la.top.planes, lb.top.planes, rg.levels[-1].planes))
    return collapse(LaplacianPyramid(bands, top), kernel)


def seam_energy(img: Image, orientation: str = VERTICAL) -> float:
    """Largest jump between adjacent pixels along the blend axis.

    For a vertical seam this is the max absolute difference between
    neighboring columns anywhere in the image; it quantifies how visible
    a stitch is (0.6 for a hard cut between constants 0.2 and 0.8).
    """
    p = img.planes
    if orientation == VERTICAL:
        if img.width < 2:
            return 0.0
        d = p[:, :, 1:] - p[:, :, :-1]
    elif orientation == HORIZONTAL:
        if img.height < 2:
            return 0.0
        d = p[:, 1:, :] - p[:, :-1, :]
    else:
        raise ValueError(f"unknown orientation {orientation!r}")
    return float(np.abs(d).max())
