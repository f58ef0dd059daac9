"""Graph datasets and the ``RAGC`` binary cache.

Layout (little-endian)::

    b"RAGC"  u16 version=1
    u32 class count, then per class: u32 byte length + UTF-8 name
    u32 graph count, then per graph:
        u32 label, u32 N, u32 E
        N*3 float32 node features (row-major)
        E*2 u32 edge endpoints (u < v)

The layout carries no split field; the split tag is taken from the file name.
"""

from __future__ import annotations

import io
import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from ..exceptions import CacheCorruptionError, CacheFormatError, InputError
from ..utils.byte_reader import ByteReader
from ..utils.file_utils import atomic_write_bytes, atomic_write_text, format_file_size
from .rag import RegionGraph

logger = logging.getLogger(__name__)

MAGIC = b"RAGC"
VERSION = 1
SPLIT_TAGS = ("train", "test", "unspecified")


@dataclass(eq=False)
class GraphDataset:
    """Labelled region graphs sharing one ordered class table."""

    graphs: List[RegionGraph]
    class_names: List[str]
    split_tag: str = "unspecified"
    extras: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.split_tag not in SPLIT_TAGS:
            raise InputError(f"unknown split tag '{self.split_tag}'")
        for index, graph in enumerate(self.graphs):
            if graph.label >= len(self.class_names):
                raise InputError(f"graph {index} has label {graph.label} but only "
                                 f"{len(self.class_names)} classes are defined")

    def __len__(self) -> int:
        return len(self.graphs)

    def __iter__(self):
        return iter(self.graphs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GraphDataset):
            return NotImplemented
        return (self.class_names == other.class_names
                and self.split_tag == other.split_tag
                and len(self.graphs) == len(other.graphs)
                and all(a == b for a, b in zip(self.graphs, other.graphs)))

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    @property
    def labels(self) -> np.ndarray:
        return np.array([g.label for g in self.graphs], dtype=np.int64)


def split_tag_from_path(path: Union[str, Path]) -> str:
    """``x.train.ragc`` -> train, ``x.test.ragc`` -> test, otherwise unspecified."""
    parts = Path(path).name.split(".")[1:]
    for tag in ("train", "test"):
        if tag in parts:
            return tag
    return "unspecified"


def encode_dataset(ds: GraphDataset) -> bytes:
    buffer = io.BytesIO()
    buffer.write(MAGIC)
    buffer.write(struct.pack("<H", VERSION))
    buffer.write(struct.pack("<I", len(ds.class_names)))
    for name in ds.class_names:
        encoded = name.encode("utf-8")
        buffer.write(struct.pack("<I", len(encoded)))
        buffer.write(encoded)
    buffer.write(struct.pack("<I", len(ds.graphs)))
    for graph in ds.graphs:
        buffer.write(struct.pack("<III", graph.label, graph.num_nodes, graph.num_edges))
        buffer.write(graph.node_features.astype("<f4").tobytes())
        buffer.write(graph.edges.astype("<u4").tobytes())
    return buffer.getvalue()


def write_cache(ds: GraphDataset, path: Union[str, Path]) -> None:
    """Write ``ds`` to ``path`` atomically."""
    payload = encode_dataset(ds)
    atomic_write_bytes(path, payload)
    logger.info(f"Wrote {len(ds)} graphs ({format_file_size(len(payload))}) to {path}")


def decode_dataset(payload: bytes, split_tag: str = "unspecified") -> GraphDataset:
    if payload[:len(MAGIC)] != MAGIC:
        raise CacheFormatError("not a graph cache (bad magic bytes)")
    cursor = ByteReader(payload)
    cursor.take(len(MAGIC), "magic")
    (version,) = cursor.unpack("<H", "version")
    if version != VERSION:
        raise CacheFormatError(f"unsupported cache version {version}")

    (num_classes,) = cursor.unpack("<I", "class count")
    class_names = [cursor.text("<I", f"class name {i}") for i in range(num_classes)]

    (num_graphs,) = cursor.unpack("<I", "graph count")
    graphs = []
    for g in range(num_graphs):
        start = cursor.offset
        label, n, e = cursor.unpack("<III", f"graph {g} header")
        features = cursor.array("<f4", n * 3, f"graph {g} features").reshape(n, 3)
        edges = cursor.array("<u4", e * 2, f"graph {g} edges").reshape(e, 2)
        try:
            graphs.append(RegionGraph(features.astype(np.float32),
                                      edges.astype(np.int64), label))
        except InputError as err:
            raise CacheCorruptionError(f"graph {g} is invalid: {err.detail}", start)

    if cursor.remaining:
        raise CacheCorruptionError(f"{cursor.remaining} unexpected trailing bytes",
                                   cursor.offset)
    try:
        return GraphDataset(graphs, class_names, split_tag)
    except InputError as err:
        raise CacheCorruptionError(err.detail)


def read_cache(path: Union[str, Path], split_tag: Optional[str] = None) -> GraphDataset:
    """Load a cache file; nothing is returned unless the whole payload parses."""
    path = Path(path)
    try:
        payload = path.read_bytes()
    except FileNotFoundError:
        raise InputError(f"cache file not found: {path}")
    except OSError as e:
        raise InputError(f"cannot read cache file {path}: {e}")
    if split_tag is None:
        split_tag = split_tag_from_path(path)
    return decode_dataset(payload, split_tag)


def export_json(ds: GraphDataset) -> Dict[str, Any]:
    """The cache content as plain JSON-compatible data."""
    return {
        "format": "RAGC",
        "version": VERSION,
        "split": ds.split_tag,
        "class_names": list(ds.class_names),
        "graphs": [graph.to_dict() for graph in ds.graphs],
    }


def write_json(ds: GraphDataset, path: Union[str, Path]) -> None:
    atomic_write_text(path, json.dumps(export_json(ds)) + "\n")


def _stats(values: np.ndarray) -> Dict[str, float]:
    if values.size == 0:
        return {"min": 0, "mean": 0.0, "max": 0}
    return {"min": int(values.min()), "mean": float(values.mean()), "max": int(values.max())}


def dataset_summary(ds: GraphDataset) -> Dict[str, Any]:
    """Class histogram and node/edge statistics."""
    nodes = np.array([g.num_nodes for g in ds.graphs], dtype=np.int64)
    edges = np.array([g.num_edges for g in ds.graphs], dtype=np.int64)
    histogram = np.bincount(ds.labels, minlength=ds.num_classes) if len(ds) else \
        np.zeros(ds.num_classes, dtype=np.int64)
    total_nodes = int(nodes.sum())
    return {
        "split": ds.split_tag,
        "num_graphs": len(ds),
        "num_classes": ds.num_classes,
        "class_histogram": {name: int(count)
                            for name, count in zip(ds.class_names, histogram)},
        "nodes": _stats(nodes),
        "edges": _stats(edges),
        "mean_degree": (2.0 * float(edges.sum()) / total_nodes) if total_nodes else 0.0,
    }
