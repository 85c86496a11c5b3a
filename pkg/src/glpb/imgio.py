"""PNG decode/encode between disk and the planar float32 layout.

PNG is the only codec written: it is lossless, which the reproducibility
manifests depend on (a re-run must produce byte-identical files).  Decoding
accepts whatever Pillow can open but grayscale stays 1-channel and anything
else is converted to RGB.  Values are scaled to [0, 1] on load and clamped
back to [0, 1] on save; the in-memory pipeline itself never clamps.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import PIL.Image

from .errors import DecodeError
from .pyramid import Image

__all__ = ["load_image", "save_image"]


def load_image(path: str | Path) -> Image:
    """Decode an image file into planar float32 on [0, 1]."""
    try:
        with PIL.Image.open(path) as pil:
            if pil.mode not in ("L", "RGB"):
                pil = pil.convert("L" if pil.mode in ("1", "I", "I;16", "LA") else "RGB")
            arr = np.asarray(pil, dtype=np.float32) / 255.0
    except FileNotFoundError:
        raise
    except Exception as exc:  # Pillow raises a zoo of types for bad files
        raise DecodeError(f"cannot decode {path}: {exc}") from exc
    if arr.ndim == 2:
        planes = arr[None, :, :]
    else:
        planes = np.ascontiguousarray(arr.transpose(2, 0, 1))
    return Image(planes)


def save_image(img: Image, path: str | Path) -> None:
    """Clamp to [0, 1], quantize to 8 bits, and write a PNG."""
    arr = np.clip(img.planes, 0.0, 1.0)
    u8 = np.rint(arr * 255.0).astype(np.uint8)
    if img.channels == 1:
        pil = PIL.Image.fromarray(u8[0], mode="L")
    else:
        pil = PIL.Image.fromarray(u8.transpose(1, 2, 0), mode="RGB")
    pil.save(path, format="PNG")
