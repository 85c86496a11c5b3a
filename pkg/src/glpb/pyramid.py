"""Gaussian and Laplacian image pyramids built on a separable 5-tap kernel.

Images are planar float32 arrays of shape (channels, height, width) with
intensities nominally on [0, 1].  All pyramid arithmetic stays in float32
and is never clamped: Laplacian band values are signed and clamping them
would break the exact collapse/build round trip.  Clamping to [0, 1]
happens only when an image is encoded to disk (see imgio).

The two primitives everything else rests on:

* ``reduce``  -- separable 5-tap low-pass filter followed by keeping every
  second pixel; output dims are the ceiling halves of the input dims.
* ``expand``  -- the matching interpolator: each output pixel is twice the
  tap-weighted sum of the input pixels at the even-coordinate positions
  around it (x2 per axis, so x4 overall in 2-D).  The caller names the
  target dims explicitly because both 2n-1 and 2n collapse to n under
  ceil-halving.

Boundaries reflect about the edge pixel without repeating it (the
``reflect`` convention), per channel, on both primitives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import TargetDimMismatch, TooManyLevels

__all__ = [
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
]

_ATOL = 1e-6  # tolerance for kernel property checks


@dataclass(frozen=True)
class Image:
    """Planar multi-channel raster: float32 planes shaped (channels, height, width).

    The planar, row-major, channel-major layout is the module's in-memory
    contract.  Values must be finite; they may leave [0, 1] transiently
    (Laplacian bands, unclamped blends).
    """

    planes: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.planes, dtype=np.float32))
        if arr.ndim != 3:
            raise ValueError(f"planes must be 3-D (channels, height, width), got shape {arr.shape}")
        c, h, w = arr.shape
        if c not in (1, 3):
            raise ValueError(f"channel count must be 1 or 3, got {c}")
        if h < 1 or w < 1:
            raise ValueError(f"image dims must be >= 1, got {w}x{h}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image contains non-finite values")
        object.__setattr__(self, "planes", arr)

    @property
    def channels(self) -> int:
        return self.planes.shape[0]

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    @classmethod
    def constant(cls, width: int, height: int, value: float, channels: int = 1) -> "Image":
        return cls(np.full((channels, height, width), value, dtype=np.float32))


@dataclass(frozen=True)
class Kernel:
    """The 1-D generating weights; the 2-D weight is their outer product.

    A valid kernel has 5 taps that sum to 1, are symmetric about the
    center, and split total weight equally between the even and odd
    decimation phases (taps[0] + taps[2] + taps[4] == taps[1] + taps[3]
    == 1/2).  The last property is what makes reduce and expand preserve
    constant images exactly.
    """

    taps: np.ndarray

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.float32)
        if taps.shape != (5,):
            raise ValueError(f"kernel must have exactly 5 taps, got shape {taps.shape}")
        if abs(float(taps.sum()) - 1.0) > _ATOL:
            raise ValueError("kernel taps must sum to 1")
        if abs(float(taps[0] - taps[4])) > _ATOL or abs(float(taps[1] - taps[3])) > _ATOL:
            raise ValueError("kernel taps must be symmetric")
        even = float(taps[0] + taps[2] + taps[4])
        odd = float(taps[1] + taps[3])
        if abs(even - 0.5) > _ATOL or abs(odd - 0.5) > _ATOL:
            raise ValueError("kernel phases must each sum to 1/2")
        object.__setattr__(self, "taps", taps)


# [1, 2, 1]/4 convolved with itself: the classic binomial generator.
BINOMIAL_KERNEL = Kernel(np.array([1.0, 4.0, 6.0, 4.0, 1.0], dtype=np.float32) / 16.0)


@dataclass(frozen=True)
class GaussianPyramid:
    """Low-pass level stack; levels[0] is the original image."""

    levels: list[Image]

    @property
    def n_levels(self) -> int:
        """Number of reductions applied (levels above the base)."""
        return len(self.levels) - 1

    @property
    def level_dims(self) -> list[tuple[int, int]]:
        return [(lv.width, lv.height) for lv in self.levels]


@dataclass(frozen=True)
class LaplacianPyramid:
    """Band-pass stack plus the coarsest Gaussian level as residual top.

    band_levels[l] has the dims of Gaussian level l; ``top`` is the
    smallest Gaussian level unchanged, which is what makes the
    decomposition invertible.
    """

    band_levels: list[Image]
    top: Image

    @property
    def n_levels(self) -> int:
        return len(self.band_levels)

    @property
    def level_dims(self) -> list[tuple[int, int]]:
        return [(lv.width, lv.height) for lv in self.band_levels] + [(self.top.width, self.top.height)]


def _half(n: int) -> int:
    return (n + 1) // 2


def _axis_slices(ndim: int, axis: int, start: int, stop: int, step: int = 1):
    sl = [slice(None)] * ndim
    sl[axis] = slice(start, stop, step)
    return tuple(sl)


def _reduce_axis(arr: np.ndarray, taps: np.ndarray, axis: int) -> np.ndarray:
    """Filter with the 5 taps and keep every second sample along one axis."""
    n = arr.shape[axis]
    out_n = _half(n)
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (2, 2)
    padded = np.pad(arr, pad, mode="reflect")
    # out[x] = sum_k taps[k] * in[2x + k - 2]  == padded[2x + k]
    acc = taps[0] * padded[_axis_slices(arr.ndim, axis, 0, 2 * out_n - 1, 2)]
    tmp = np.empty_like(acc)  # reused scratch; the temporaries dominate cost otherwise
    for k in range(1, 5):
        np.multiply(padded[_axis_slices(arr.ndim, axis, k, k + 2 * out_n - 1, 2)], taps[k], out=tmp)
        acc += tmp
    return acc


def _expand_axis(arr: np.ndarray, taps: np.ndarray, axis: int, target: int) -> np.ndarray:
    """Interpolate one axis from n samples to target in {2n-1, 2n}.

    out[x] = 2 * sum over taps k with (x - (k-2)) even of
             taps[k] * in[(x - (k-2)) / 2], input indices reflected.
    Splitting x by parity turns this into two 2- or 3-tap filters.
    """
    n = arr.shape[axis]
    n_odd = target // 2  # number of odd output positions; even positions == n
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (1, 1)
    padded = np.pad(arr, pad, mode="reflect")
    ndim = arr.ndim

    # even outputs x=2j draw on in[j-1], in[j], in[j+1] (taps 4, 2, 0)
    even = taps[4] * padded[_axis_slices(ndim, axis, 0, n)]
    tmp = np.empty_like(even)
    np.multiply(padded[_axis_slices(ndim, axis, 1, n + 1)], taps[2], out=tmp)
    even += tmp
    np.multiply(padded[_axis_slices(ndim, axis, 2, n + 2)], taps[0], out=tmp)
    even += tmp
    even *= 2.0

    shape = list(arr.shape)
    shape[axis] = target
    out = np.empty(shape, dtype=arr.dtype)
    out[_axis_slices(ndim, axis, 0, None, 2)] = even

    if n_odd:
        # odd outputs x=2j+1 draw on in[j], in[j+1] (taps 3, 1)
        scratch = tmp[_axis_slices(ndim, axis, 0, n_odd)]
        odd = taps[3] * padded[_axis_slices(ndim, axis, 1, n_odd + 1)]
        np.multiply(padded[_axis_slices(ndim, axis, 2, n_odd + 2)], taps[1], out=scratch)
        odd += scratch
        odd *= 2.0
        out[_axis_slices(ndim, axis, 1, None, 2)] = odd
    return out


def reduce(img: Image, kernel: Kernel = BINOMIAL_KERNEL) -> Image:
    """Low-pass filter and decimate: output dims are (ceil(w/2), ceil(h/2)).

    Each output pixel (x, y) is the 5x5 tap-weighted sum of input pixels
    centered on (2x, 2y), boundaries reflected, channels independent.
    A 1x1 input comes back as a 1x1 copy.
    """
    taps = kernel.taps
    out = _reduce_axis(img.planes, taps, axis=1)
    out = _reduce_axis(out, taps, axis=2)
    return Image(out)


def expand(img: Image, kernel: Kernel, target_w: int, target_h: int) -> Image:
    """Upsample to the named target dims, which must be 2n-1 or 2n per axis.

    Inverse-phase interpolation of reduce: zero-stuffed upsampling followed
    by the 5x5 filter scaled by 4, equal-phase kernels making constants map
    to constants.  Raises TargetDimMismatch for any other target.
    """
    w, h = img.width, img.height
    if target_w not in (2 * w - 1, 2 * w) or target_h not in (2 * h - 1, 2 * h):
        raise TargetDimMismatch(
            f"cannot expand {w}x{h} to {target_w}x{target_h}: "
            f"legal targets are {2 * w - 1} or {2 * w} wide by {2 * h - 1} or {2 * h} high"
        )
    taps = kernel.taps
    out = _expand_axis(img.planes, taps, axis=1, target=target_h)
    out = _expand_axis(out, taps, axis=2, target=target_w)
    return Image(out)


def max_levels(width: int, height: int) -> int:
    """Deepest legal pyramid for a width x height image: floor(log2(min dim))."""
    return min(width, height).bit_length() - 1


def default_levels(width: int, height: int) -> int:
    """Depth used when the caller does not choose one; keeps the top >= 4 px."""
    return max(0, max_levels(width, height) - 2)


def _check_levels(img: Image, n_levels: int) -> None:
    if n_levels < 0:
        raise ValueError(f"n_levels must be >= 0, got {n_levels}")
    limit = max_levels(img.width, img.height)
    if n_levels > limit:
        raise TooManyLevels(
            f"{n_levels} levels requested but a {img.width}x{img.height} image supports at most {limit}"
        )


def build_gaussian(img: Image, kernel: Kernel = BINOMIAL_KERNEL, n_levels: int = 0) -> GaussianPyramid:
    """Stack of n_levels successive reductions below the original image."""
    _check_levels(img, n_levels)
    levels = [img]
    for _ in range(n_levels):
        levels.append(reduce(levels[-1], kernel))
    return GaussianPyramid(levels)


def build_laplacian(img: Image, kernel: Kernel = BINOMIAL_KERNEL, n_levels: int = 0) -> LaplacianPyramid:
    """Band-pass decomposition: each band is a Gaussian level minus the
    expansion of the next-coarser one; the coarsest level rides along as
    the residual top."""
    gp = build_gaussian(img, kernel, n_levels)
    bands = []
    for l in range(n_levels):
        fine = gp.levels[l]
        up = expand(gp.levels[l + 1], kernel, fine.width, fine.height)
        bands.append(Image(fine.planes - up.planes))
    return LaplacianPyramid(bands, gp.levels[-1])


def collapse(lp: LaplacianPyramid, kernel: Kernel = BINOMIAL_KERNEL) -> Image:
    """Invert build_laplacian: expand the running result to each band's
    dims and add the band, coarsest first."""
    current = lp.top
    for band in reversed(lp.band_levels):
        up = expand(current, kernel, band.width, band.height)
        current = Image(up.planes + band.planes)
    return current
