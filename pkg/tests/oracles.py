"""Independent brute-force references the fast implementations are checked against.

Everything here is written the slow, obvious way: materialize the full 5x5
weight table as the outer product of the taps, loop over output pixels, and
reflect indices arithmetically.  float64 throughout.  None of it shares code
with the library's separable path.
"""

import numpy as np


def reflect_index(i, n):
    """Mirror an out-of-range index about the boundary pixels (no edge repeat)."""
    if n == 1:
        return 0
    period = 2 * (n - 1)
    i = i % period
    return i if i < n else period - i


def reduce_oracle(plane, taps):
    """Direct 2-D convolution with the full 5x5 table, then keep even pixels."""
    h, w = plane.shape
    table = np.outer(np.asarray(taps, dtype=np.float64), np.asarray(taps, dtype=np.float64))
    oh, ow = (h + 1) // 2, (w + 1) // 2
    out = np.zeros((oh, ow), dtype=np.float64)
    for y in range(oh):
        for x in range(ow):
            acc = 0.0
            for m in range(-2, 3):
                for n in range(-2, 3):
                    yy = reflect_index(2 * y + m, h)
                    xx = reflect_index(2 * x + n, w)
                    acc += table[m + 2, n + 2] * plane[yy, xx]
            out[y, x] = acc
    return out


def expand_oracle(plane, taps, target_h, target_w):
    """Zero-stuffed upsample convolved with 4x the 5x5 table.

    Implemented as the equivalent direct sum over the even-coordinate
    contributions, indices reflected in the input domain.
    """
    h, w = plane.shape
    table = np.outer(np.asarray(taps, dtype=np.float64), np.asarray(taps, dtype=np.float64))
    out = np.zeros((target_h, target_w), dtype=np.float64)
    for y in range(target_h):
        for x in range(target_w):
            acc = 0.0
            for m in range(-2, 3):
                for n in range(-2, 3):
                    if (y - m) % 2 == 0 and (x - n) % 2 == 0:
                        yy = reflect_index((y - m) // 2, h)
                        xx = reflect_index((x - n) // 2, w)
                        acc += table[m + 2, n + 2] * plane[yy, xx]
            out[y, x] = 4.0 * acc
    return out


def select_oracle(a, b, mask):
    """Per-pixel ternary select for binary masks."""
    out = np.empty_like(a)
    c, h, w = a.shape
    for ch in range(c):
        for y in range(h):
            for x in range(w):
                out[ch, y, x] = b[ch, y, x] if mask[0, y, x] >= 0.5 else a[ch, y, x]
    return out
