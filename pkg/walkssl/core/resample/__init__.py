"""resample: face-count augmentations by subdivision and quadric-error simplification."""

from .simplify import QuadricSimplifier, simplify, within_tolerance
from .resample import ResampleTargets, subdivide, resample_to


__all__ = [
    "QuadricSimplifier",
    "simplify",
    "within_tolerance",
    "ResampleTargets",
    "subdivide",
    "resample_to",
]
