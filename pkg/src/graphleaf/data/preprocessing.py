"""Image decoding and standardisation."""

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..exceptions import DecodeError, InputError

IMAGE_SIZE = 128
NORMALIZE_MEAN = 0.5
NORMALIZE_STD = 0.5

# Rounding slack when checking the [-1, 1] range of float32 pixels.
_RANGE_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class NormalizedImage:
    """An RGB image scaled to [-1, 1], shape (H, W, 3), float32.

    ``preprocess_image`` always produces 128x128 images; other sizes are
    accepted so small hand-built images can drive the segmentation and graph
    code directly.
    """

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float32)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise InputError(f"image must have shape (H, W, 3), got {pixels.shape}")
        if pixels.shape[0] == 0 or pixels.shape[1] == 0:
            raise InputError("image must have non-zero height and width")
        if not np.all(np.isfinite(pixels)):
            raise InputError("image contains non-finite values")
        if pixels.min() < -1 - _RANGE_TOLERANCE or pixels.max() > 1 + _RANGE_TOLERANCE:
            raise InputError("normalized pixel values must lie in [-1, 1]")
        object.__setattr__(self, 'pixels', pixels)

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def shape(self):
        return self.pixels.shape

    def to_unit_range(self) -> np.ndarray:
        """Undo the normalisation: RGB values in [0, 1] as float64."""
        rgb = self.pixels.astype(np.float64) * NORMALIZE_STD + NORMALIZE_MEAN
        return np.clip(rgb, 0.0, 1.0)

    @classmethod
    def from_uint8(cls, rgb: np.ndarray) -> "NormalizedImage":
        """Normalise an 8-bit RGB array (H, W, 3)."""
        return cls(normalize_array(rgb))


def normalize_array(rgb: np.ndarray) -> np.ndarray:
    """Map 8-bit RGB values to [-1, 1]: (v/255 - mean) / std per channel."""
    unit = np.asarray(rgb, dtype=np.float32) / np.float32(255.0)
    return (unit - np.float32(NORMALIZE_MEAN)) / np.float32(NORMALIZE_STD)


def load_rgb(path: Union[str, Path]) -> Image.Image:
    """Decode an image file as 8-bit RGB; grayscale is replicated across channels."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            img.load()
            if img.width == 0 or img.height == 0:
                raise InputError(f"image has a zero dimension: {path}")
            return img.convert('RGB')
    except InputError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as e:
        raise DecodeError(f"cannot decode image {path}: {e}")


def preprocess_image(path: Union[str, Path], size: int = IMAGE_SIZE) -> NormalizedImage:
    """Decode, bilinearly resize to ``size`` x ``size`` and normalise to [-1, 1]."""
    img = load_rgb(path)
    if img.size != (size, size):
        img = img.resize((size, size), Image.BILINEAR)
    return NormalizedImage(normalize_array(np.asarray(img, dtype=np.uint8)))
