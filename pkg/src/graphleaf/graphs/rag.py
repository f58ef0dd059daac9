"""Region adjacency graphs built from superpixel maps."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from ..data.preprocessing import NormalizedImage
from ..exceptions import InputError
from ..segmentation.slic import SegmentMap

_RANGE_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class RegionGraph:
    """One image as a graph.

    ``node_features`` is (N, 3) float32 mean normalised RGB; ``edges`` is
    (E, 2) int64 with u < v, sorted lexicographically and without duplicates.
    """

    node_features: np.ndarray
    edges: np.ndarray
    label: int

    def __post_init__(self):
        features = np.asarray(self.node_features, dtype=np.float32)
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, 'node_features', features)
        object.__setattr__(self, 'edges', edges)
        object.__setattr__(self, 'label', int(self.label))
        self.validate()

    def validate(self) -> None:
        features, edges = self.node_features, self.edges
        if features.ndim != 2 or features.shape[1] != 3:
            raise InputError(f"node features must have shape (N, 3), got {features.shape}")
        if features.shape[0] == 0:
            raise InputError("a region graph needs at least one node")
        if not np.all(np.isfinite(features)):
            raise InputError("node features contain non-finite values")
        if np.abs(features).max() > 1.0 + _RANGE_TOLERANCE:
            raise InputError("node features must lie in [-1, 1]")
        if self.label < 0:
            raise InputError(f"negative class label {self.label}")
        if len(edges) == 0:
            return
        n = features.shape[0]
        if edges.min() < 0 or edges.max() >= n:
            raise InputError(f"edge endpoint out of range for {n} nodes")
        if np.any(edges[:, 0] >= edges[:, 1]):
            raise InputError("edges must satisfy u < v")
        keys = edges[:, 0] * n + edges[:, 1]
        if np.any(np.diff(keys) <= 0):
            raise InputError("edges must be sorted and free of duplicates")

    @property
    def num_nodes(self) -> int:
        return int(self.node_features.shape[0])

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RegionGraph):
            return NotImplemented
        return (self.label == other.label
                and np.array_equal(self.node_features, other.node_features)
                and np.array_equal(self.edges, other.edges))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "nodes": self.node_features.tolist(),
            "edges": self.edges.tolist(),
        }


def canonical_edges(pairs: np.ndarray) -> np.ndarray:
    """Orient pairs as u < v, drop self-pairs and duplicates, sort."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    if len(pairs) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    return np.unique(np.sort(pairs, axis=1), axis=0)


def build_rag(segments: SegmentMap, image: NormalizedImage, label: int) -> RegionGraph:
    """Nodes are segments (mean RGB feature); edges join 4-adjacent segments."""
    if segments.shape != image.shape[:2]:
        raise InputError(f"segment map {segments.shape} does not match image "
                         f"{image.shape[:2]}")
    labels = segments.labels
    n = segments.num_segments
    flat = labels.ravel()
    counts = np.bincount(flat, minlength=n).astype(np.float64)
    pixels = image.pixels.reshape(-1, 3).astype(np.float64)
    means = np.stack([np.bincount(flat, weights=pixels[:, c], minlength=n) / counts
                      for c in range(3)], axis=1)

    horizontal = np.stack([labels[:, :-1].ravel(), labels[:, 1:].ravel()], axis=1)
    vertical = np.stack([labels[:-1, :].ravel(), labels[1:, :].ravel()], axis=1)
    edges = canonical_edges(np.concatenate([horizontal, vertical], axis=0))
    return RegionGraph(means.astype(np.float32), edges, label)
