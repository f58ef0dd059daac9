"""GraphLeaf - superpixel graphs and graph neural networks for leaf-disease images."""

from .exceptions import (
    CacheCorruptionError,
    CacheFormatError,
    DecodeError,
    GraphLeafError,
    InputError,
    NumericError,
    UsageError,
)
from .config import ConfigManager, PreprocessConfig, RunConfig
from .segmentation import SegmentMap, segment_superpixels
from .graphs import GraphDataset, RegionGraph, build_rag, read_cache, write_cache
from .models import GraphClassifier, ModelConfig, augment_edges
from .training import evaluate_model, make_batches, train_model

__version__ = "1.0.0"
__author__ = "GraphLeaf Team"

__all__ = [
    "CacheCorruptionError",
    "CacheFormatError",
    "DecodeError",
    "GraphLeafError",
    "InputError",
    "NumericError",
    "UsageError",
    "ConfigManager",
    "PreprocessConfig",
    "RunConfig",
    "SegmentMap",
    "segment_superpixels",
    "GraphDataset",
    "RegionGraph",
    "build_rag",
    "read_cache",
    "write_cache",
    "GraphClassifier",
    "ModelConfig",
    "augment_edges",
    "evaluate_model",
    "make_batches",
    "train_model",
]
