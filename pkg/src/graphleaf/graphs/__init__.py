"""Region adjacency graphs, graph datasets and the binary cache."""

from .rag import RegionGraph, build_rag, canonical_edges
from .cache import (
    GraphDataset,
    dataset_summary,
    export_json,
    read_cache,
    split_tag_from_path,
    write_cache,
    write_json,
)

__all__ = [
    "RegionGraph",
    "build_rag",
    "canonical_edges",
    "GraphDataset",
    "dataset_summary",
    "export_json",
    "read_cache",
    "split_tag_from_path",
    "write_cache",
    "write_json",
]
