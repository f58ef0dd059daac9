"""SLIC superpixels and connectivity enforcement.

Clustering runs in CIELAB (converted from the un-normalised [0, 1] RGB) plus
pixel coordinates. The distance between a pixel and a centre is

    d = sqrt(d_lab^2 + (compactness / S)^2 * d_xy^2),   S = sqrt(H * W / k)

and each centre only claims pixels inside a 2S x 2S window around it.
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Set, Union

import numpy as np
from skimage.color import rgb2lab
from skimage.measure import label as label_components

from ..data.preprocessing import NormalizedImage
from ..exceptions import InputError
from ..utils.file_utils import atomic_write_text
from ..utils.validation import validate_positive_integer, validate_positive_real

logger = logging.getLogger(__name__)

DEFAULT_SEGMENTS = 50
DEFAULT_COMPACTNESS = 10.0
DEFAULT_MAX_ITER = 10
CONVERGENCE_THRESHOLD = 0.5


@dataclass(frozen=True, eq=False)
class SegmentMap:
    """Per-pixel superpixel ids, contiguous in 0..num_segments-1."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2:
            raise InputError(f"segment labels must be 2-D, got shape {labels.shape}")
        if labels.size == 0:
            raise InputError("segment map is empty")
        if not np.issubdtype(labels.dtype, np.integer):
            raise InputError("segment labels must be integers")
        if labels.min() < 0:
            raise InputError("segment labels must be non-negative")
        labels = labels.astype(np.int32, copy=False)
        present = np.unique(labels)
        if present[-1] != len(present) - 1:
            raise InputError("segment labels must be contiguous from 0")
        object.__setattr__(self, 'labels', labels)

    @property
    def num_segments(self) -> int:
        return int(self.labels.max()) + 1

    @property
    def shape(self):
        return self.labels.shape

    def segment_sizes(self) -> np.ndarray:
        return np.bincount(self.labels.ravel(), minlength=self.num_segments)

    def is_connected(self) -> bool:
        """True when every segment is a single 4-connected component."""
        components = label_components(self.labels + 1, background=0, connectivity=1)
        return int(components.max()) == self.num_segments

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SegmentMap):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    def to_pgm(self) -> str:
        """Plain-text ``P2`` raster of the labels, for debugging."""
        height, width = self.labels.shape
        rows = [" ".join(str(v) for v in row) for row in self.labels.tolist()]
        header = f"P2\n{width} {height}\n{max(self.num_segments - 1, 1)}\n"
        return header + "\n".join(rows) + "\n"

    def write_pgm(self, path: Union[str, Path]) -> None:
        atomic_write_text(path, self.to_pgm())


def default_min_size(height: int, width: int, k: int) -> int:
    """Orphan threshold: a quarter of the nominal superpixel area."""
    return max(1, int((height * width / k) / 4))


def _compact_labels(labels: np.ndarray) -> np.ndarray:
    _, inverse = np.unique(labels, return_inverse=True)
    return inverse.reshape(labels.shape).astype(np.int32)


def _grid_centers(height: int, width: int, k: int) -> np.ndarray:
    """Exactly ``k`` (y, x) centres on a regular grid of pixel centres."""
    rows = int(min(height, max(1, round(math.sqrt(k * height / width)))))
    base, extra = divmod(k, rows)
    centers = []
    for r in range(rows):
        cols = base + (1 if r < extra else 0)
        y = (r + 0.5) * height / rows - 0.5
        for c in range(cols):
            x = (c + 0.5) * width / cols - 0.5
            centers.append((y, x))
    return np.array(centers, dtype=np.float64)


def _lab_gradient(lab: np.ndarray) -> np.ndarray:
    padded = np.pad(lab, ((1, 1), (1, 1), (0, 0)), mode='edge')
    dx = padded[1:-1, 2:] - padded[1:-1, :-2]
    dy = padded[2:, 1:-1] - padded[:-2, 1:-1]
    return np.sum(dx ** 2, axis=2) + np.sum(dy ** 2, axis=2)


def _perturb_centers(centers: np.ndarray, gradient: np.ndarray) -> np.ndarray:
    """Move each centre to the lowest-gradient pixel of its 3x3 neighbourhood.

    A centre keeps its (possibly sub-pixel) grid position unless some
    neighbour is strictly smoother than the pixel it sits on.
    """
    height, width = gradient.shape
    moved = centers.copy()
    for i, (cy, cx) in enumerate(centers):
        py = int(min(height - 1, max(0, round(cy))))
        px = int(min(width - 1, max(0, round(cx))))
        best = gradient[py, px]
        best_pos = None
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                ny, nx = py + dy, px + dx
                if 0 <= ny < height and 0 <= nx < width and gradient[ny, nx] < best:
                    best = gradient[ny, nx]
                    best_pos = (ny, nx)
        if best_pos is not None:
            moved[i] = best_pos
    return moved


def slic_segment(image: NormalizedImage, k: int = DEFAULT_SEGMENTS,
                 compactness: float = DEFAULT_COMPACTNESS,
                 max_iter: int = DEFAULT_MAX_ITER) -> SegmentMap:
    """Cluster pixels into at most ``k`` superpixels (not yet connectivity-enforced).

    Ties in distance go to the lowest centre id. Clusters that end up empty are
    dropped and the remaining labels are compacted.
    """
    validate_positive_integer(k, "k")
    validate_positive_real(compactness, "compactness")
    validate_positive_integer(max_iter, "max_iter")

    height, width = image.height, image.width
    num_pixels = height * width
    if k > num_pixels:
        raise InputError(f"k={k} exceeds the number of pixels ({num_pixels})")

    lab = rgb2lab(image.to_unit_range())
    step = math.sqrt(num_pixels / k)
    spatial_weight = (compactness / step) ** 2

    positions = _perturb_centers(_grid_centers(height, width, k), _lab_gradient(lab))
    center_colors = np.array([lab[int(round(y)), int(round(x))] for y, x in
                              np.clip(positions, 0, [height - 1, width - 1])])

    ys = np.arange(height, dtype=np.float64)
    xs = np.arange(width, dtype=np.float64)
    flat_lab = lab.reshape(-1, 3)
    flat_y = np.repeat(ys, width)
    flat_x = np.tile(xs, height)

    labels = np.full((height, width), -1, dtype=np.int64)
    for iteration in range(max_iter):
        distance = np.full((height, width), np.inf)
        labels.fill(-1)
        for i, ((cy, cx), color) in enumerate(zip(positions, center_colors)):
            y0, y1 = max(0, int(math.floor(cy - step))), min(height, int(math.ceil(cy + step)) + 1)
            x0, x1 = max(0, int(math.floor(cx - step))), min(width, int(math.ceil(cx + step)) + 1)
            if y0 >= y1 or x0 >= x1:
                continue
            window = lab[y0:y1, x0:x1]
            d_lab = np.sum((window - color) ** 2, axis=2)
            d_xy = (ys[y0:y1, None] - cy) ** 2 + (xs[None, x0:x1] - cx) ** 2
            d = d_lab + spatial_weight * d_xy
            closer = d < distance[y0:y1, x0:x1]
            distance[y0:y1, x0:x1][closer] = d[closer]
            labels[y0:y1, x0:x1][closer] = i

        orphans = np.flatnonzero(labels.ravel() < 0)
        if orphans.size:
            d_all = (np.sum((flat_lab[orphans, None, :] - center_colors[None]) ** 2, axis=2)
                     + spatial_weight * ((flat_y[orphans, None] - positions[None, :, 0]) ** 2
                                         + (flat_x[orphans, None] - positions[None, :, 1]) ** 2))
            labels.ravel()[orphans] = np.argmin(d_all, axis=1)

        flat_labels = labels.ravel()
        counts = np.bincount(flat_labels, minlength=len(positions)).astype(np.float64)
        occupied = counts > 0
        new_positions = positions.copy()
        new_colors = center_colors.copy()
        new_positions[occupied, 0] = (np.bincount(flat_labels, weights=flat_y,
                                                  minlength=len(positions))[occupied]
                                      / counts[occupied])
        new_positions[occupied, 1] = (np.bincount(flat_labels, weights=flat_x,
                                                  minlength=len(positions))[occupied]
                                      / counts[occupied])
        for channel in range(3):
            new_colors[occupied, channel] = (
                np.bincount(flat_labels, weights=flat_lab[:, channel],
                            minlength=len(positions))[occupied] / counts[occupied])

        movement = float(np.mean(np.linalg.norm(new_positions - positions, axis=1)))
        positions, center_colors = new_positions, new_colors
        logger.debug(f"SLIC iteration {iteration + 1}: mean centre movement {movement:.3f}px")
        if movement < CONVERGENCE_THRESHOLD:
            break

    return SegmentMap(_compact_labels(labels))


class _RegionForest:
    """Union-find over component ids tracking each region's size and neighbours."""

    def __init__(self, sizes: np.ndarray, neighbours: Dict[int, Set[int]]):
        self.parent = list(range(len(sizes)))
        self.size = [int(s) for s in sizes]
        self.neighbours = [set(neighbours.get(c, ())) for c in range(len(sizes))]

    def find(self, item: int) -> int:
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[item] != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def merge_into(self, root: int, target: int) -> None:
        """Absorb region ``root`` into region ``target``; both must be roots."""
        self.parent[root] = target
        self.size[target] += self.size[root]
        moved = self.neighbours[root]
        self.neighbours[root] = set()
        for other in moved:
            self.neighbours[other].discard(root)
            if other != target:
                self.neighbours[other].add(target)
                self.neighbours[target].add(other)
        self.neighbours[target].discard(root)

    def absorb_small(self, min_size: int) -> None:
        """Merge regions below ``min_size`` until none with a neighbour remains.

        The smallest region goes first (ties: lower id) and joins its largest
        neighbour (ties: lower id).
        """
        heap = [(s, c) for c, s in enumerate(self.size) if s < min_size]
        heapq.heapify(heap)
        while heap:
            size, root = heapq.heappop(heap)
            if self.parent[root] != root or self.size[root] != size:
                continue
            if not self.neighbours[root]:
                continue
            target = max(sorted(self.neighbours[root]), key=lambda r: (self.size[r], -r))
            self.merge_into(root, target)
            if self.size[target] < min_size:
                heapq.heappush(heap, (self.size[target], target))


def _component_adjacency(components: np.ndarray) -> Dict[int, Set[int]]:
    pairs = []
    for a, b in ((components[:, :-1], components[:, 1:]),
                 (components[:-1, :], components[1:, :])):
        differs = a != b
        pairs.append(np.stack([a[differs], b[differs]], axis=1))
    stacked = np.concatenate(pairs, axis=0)
    neighbours: Dict[int, Set[int]] = {}
    if stacked.size:
        for u, v in np.unique(np.sort(stacked, axis=1), axis=0).tolist():
            neighbours.setdefault(u, set()).add(v)
            neighbours.setdefault(v, set()).add(u)
    return neighbours


def _relabel_by_first_appearance(labels: np.ndarray) -> np.ndarray:
    flat = labels.ravel()
    _, first_index = np.unique(flat, return_index=True)
    order = np.argsort(first_index, kind='stable')
    ranks = np.empty(len(order), dtype=np.int32)
    ranks[order] = np.arange(len(order), dtype=np.int32)
    _, inverse = np.unique(flat, return_inverse=True)
    return ranks[inverse].reshape(labels.shape)


def enforce_connectivity(raw: SegmentMap, min_size: Optional[int] = None) -> SegmentMap:
    """Split segments into 4-connected components and absorb small orphans.

    Regions smaller than ``min_size`` pixels are merged, smallest first, into
    their largest neighbouring region (ties go to the lower component id)
    until every region left is at least ``min_size`` or has no neighbour. The
    survivors are relabelled in raster order of first appearance, so a second
    pass with the same ``min_size`` returns the map unchanged.
    """
    if min_size is None:
        min_size = default_min_size(raw.shape[0], raw.shape[1], raw.num_segments)
    min_size = validate_positive_integer(min_size, "min_size")

    # Components numbered 1..C; shift to 0..C-1.
    components = label_components(raw.labels + 1, background=0, connectivity=1) - 1
    sizes = np.bincount(components.ravel())
    forest = _RegionForest(sizes, _component_adjacency(components))
    forest.absorb_small(min_size)

    roots = np.array([forest.find(c) for c in range(len(sizes))], dtype=np.int64)
    merged = roots[components]
    return SegmentMap(_relabel_by_first_appearance(merged))


def segment_superpixels(image: NormalizedImage, k: int = DEFAULT_SEGMENTS,
                        compactness: float = DEFAULT_COMPACTNESS,
                        max_iter: int = DEFAULT_MAX_ITER,
                        min_size: Optional[int] = None) -> SegmentMap:
    """SLIC followed by connectivity enforcement with the default orphan size."""
    raw = slic_segment(image, k, compactness, max_iter)
    if min_size is None:
        min_size = default_min_size(image.height, image.width, k)
    return enforce_connectivity(raw, min_size)
