"""Superpixel segmentation."""

from .slic import (
    DEFAULT_COMPACTNESS,
    DEFAULT_MAX_ITER,
    DEFAULT_SEGMENTS,
    SegmentMap,
    default_min_size,
    enforce_connectivity,
    segment_superpixels,
    slic_segment,
)

__all__ = [
    "DEFAULT_COMPACTNESS",
    "DEFAULT_MAX_ITER",
    "DEFAULT_SEGMENTS",
    "SegmentMap",
    "default_min_size",
    "enforce_connectivity",
    "segment_superpixels",
    "slic_segment",
]
