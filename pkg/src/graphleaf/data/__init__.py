"""Dataset discovery, splitting and image preprocessing."""

from .preprocessing import (
    IMAGE_SIZE,
    NormalizedImage,
    normalize_array,
    preprocess_image,
)
from .dataset import (
    IMAGE_EXTENSIONS,
    DatasetManifest,
    Sample,
    scan_dataset,
    stratified_split,
)

__all__ = [
    "IMAGE_SIZE",
    "NormalizedImage",
    "normalize_array",
    "preprocess_image",
    "IMAGE_EXTENSIONS",
    "DatasetManifest",
    "Sample",
    "scan_dataset",
    "stratified_split",
]
