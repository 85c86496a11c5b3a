"""Exception types shared across the package.

The CLI maps each of these to a distinct exit code, so keep them specific:
one class per failure mode rather than a grab-bag ValueError.
"""


class GlpbError(Exception):
    """Base class for all package-specific errors."""


class DecodeError(GlpbError):
    """An input image file could not be decoded."""


class TargetDimMismatch(GlpbError):
    """expand() was asked for a target size it cannot produce.

    Legal targets per axis are exactly 2*n - 1 and 2*n for input size n,
    so that any image produced by reduce() can be expanded back to the
    dimensions of its parent.
    """


class TooManyLevels(GlpbError):
    """Requested pyramid depth would shrink a level below 1x1."""


class DimMismatch(GlpbError):
    """Blend inputs (images and/or mask) do not share dimensions."""


class UnreadableRoot(GlpbError):
    """Dataset root directory is missing or unreadable."""


class InsufficientPatients(GlpbError):
    """A sample pool has fewer than two distinct patients, so no valid
    cross-patient pair can be formed."""


class UnassignedPatient(GlpbError):
    """A patient present in the dataset is missing from the fold file."""
