"""Class-per-directory corpus discovery and stratified splitting."""

from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..exceptions import CacheFormatError, InputError
from ..utils.file_utils import atomic_write_text, list_files_with_extensions
from ..utils.validation import validate_open_fraction

logger = logging.getLogger(__name__)

IMAGE_EXTENSIONS = ('png', 'jpg', 'jpeg', 'bmp')

# floor() slack so that e.g. 0.29 * 100 counts as 29, not 28.
_FLOOR_EPSILON = 1e-9


@dataclass(frozen=True)
class Sample:
    """One image file and its class index."""
    path: Path
    label: int


@dataclass
class DatasetManifest:
    """Ordered class names plus every (image path, class index) pair."""
    classes: List[str]
    samples: List[Sample]
    source_root: Path
    skipped: List[Path] = field(default_factory=list)

    def __post_init__(self):
        if len(set(self.classes)) != len(self.classes):
            raise InputError("class names must be unique")
        if list(self.classes) != sorted(self.classes):
            raise InputError("class names must be sorted lexicographically")
        for sample in self.samples:
            if not 0 <= sample.label < len(self.classes):
                raise InputError(f"class index {sample.label} out of range for {sample.path}")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def class_counts(self) -> Dict[str, int]:
        """Number of samples per class name, in class order."""
        counts = Counter(sample.label for sample in self.samples)
        return {name: counts.get(i, 0) for i, name in enumerate(self.classes)}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "classes": list(self.classes),
            "samples": [{"path": str(s.path), "class": s.label} for s in self.samples],
            "source_root": str(self.source_root),
            "skipped": [str(p) for p in self.skipped],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DatasetManifest":
        try:
            return cls(
                classes=list(data["classes"]),
                samples=[Sample(Path(s["path"]), int(s["class"])) for s in data["samples"]],
                source_root=Path(data.get("source_root", ".")),
                skipped=[Path(p) for p in data.get("skipped", [])],
            )
        except (KeyError, TypeError, ValueError) as e:
            raise CacheFormatError(f"malformed manifest: {e}")

    def save(self, path: Union[str, Path]) -> None:
        """Persist as ``{"classes": [...], "samples": [{"path", "class"}], ...}``."""
        atomic_write_text(path, json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "DatasetManifest":
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except FileNotFoundError:
            raise InputError(f"manifest not found: {path}")
        except json.JSONDecodeError as e:
            raise CacheFormatError(f"manifest {path} is not valid JSON: {e}")
        return cls.from_dict(data)


def _is_readable_image(path: Path) -> bool:
    try:
        with Image.open(path) as img:
            img.verify()
        return True
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError):
        return False


def scan_dataset(root: Union[str, Path]) -> DatasetManifest:
    """Enumerate ``root/<class_name>/<image>`` into a manifest.

    Class order is lexicographic over directory names. Files that fail to open
    are skipped with a warning and listed in ``manifest.skipped``.
    """
    root = Path(root)
    if not root.is_dir():
        raise InputError(f"dataset root does not exist: {root}")

    class_dirs = sorted((p for p in root.iterdir() if p.is_dir()), key=lambda p: p.name)
    if not class_dirs:
        raise InputError(f"dataset root has no class subdirectories: {root}")

    classes = [d.name for d in class_dirs]
    samples: List[Sample] = []
    skipped: List[Path] = []

    for label, class_dir in enumerate(class_dirs):
        found = 0
        for path in list_files_with_extensions(class_dir, IMAGE_EXTENSIONS):
            if not _is_readable_image(path):
                logger.warning(f"Skipping unreadable image: {path}")
                skipped.append(path)
                continue
            samples.append(Sample(path, label))
            found += 1
        if found == 0:
            raise InputError(f"class directory '{class_dir.name}' contains no readable images")

    if skipped:
        logger.info(f"Skipped {len(skipped)} unreadable file(s) under {root}")
    logger.info(f"Found {len(samples)} images in {len(classes)} classes under {root}")
    return DatasetManifest(classes, samples, root, skipped)


def train_count(n: int, train_fraction: float) -> int:
    """Per-class train size: floor(fraction * n), at least 1."""
    return max(1, int(math.floor(train_fraction * n + _FLOOR_EPSILON)))


def stratified_split(manifest: DatasetManifest, train_fraction: float,
                     seed: Union[int, np.random.Generator]
                     ) -> Tuple[DatasetManifest, DatasetManifest]:
    """Split each class independently into train/test.

    Membership depends only on (manifest order, fraction, seed); both halves
    keep the manifest's sample order.
    """
    validate_open_fraction(train_fraction, "train_fraction")
    rng = np.random.default_rng(seed)

    by_class: Dict[int, List[int]] = {i: [] for i in range(manifest.num_classes)}
    for index, sample in enumerate(manifest.samples):
        by_class[sample.label].append(index)

    train_indices: List[int] = []
    for label, indices in by_class.items():
        if len(indices) < 2:
            raise InputError(f"class '{manifest.classes[label]}' has {len(indices)} "
                             f"sample(s); at least 2 are needed to split")
        order = rng.permutation(len(indices))
        n_train = train_count(len(indices), train_fraction)
        train_indices.extend(indices[i] for i in order[:n_train])

    chosen = set(train_indices)
    train = [s for i, s in enumerate(manifest.samples) if i in chosen]
    test = [s for i, s in enumerate(manifest.samples) if i not in chosen]
    return (DatasetManifest(list(manifest.classes), train, manifest.source_root),
            DatasetManifest(list(manifest.classes), test, manifest.source_root))
