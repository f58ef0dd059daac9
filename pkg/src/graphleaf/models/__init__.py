"""GCN, GAT and hybrid graph classifiers."""

from .config import ModelConfig, READOUTS, VARIANTS
from .augmentation import AugmentationOutcome, augment_edges, augment_edges_traced
from .batch import GraphBatch
from .layers import (
    attention_edges,
    gat_layer,
    gcn_layer,
    normalize_adjacency,
    readout,
    readout_mean,
)
from .gnn import (
    GraphClassifier,
    check_params,
    init_params,
    model_forward,
    parameter_shapes,
)

__all__ = [
    "ModelConfig",
    "READOUTS",
    "VARIANTS",
    "AugmentationOutcome",
    "augment_edges",
    "augment_edges_traced",
    "GraphBatch",
    "attention_edges",
    "gat_layer",
    "gcn_layer",
    "normalize_adjacency",
    "readout",
    "readout_mean",
    "GraphClassifier",
    "check_params",
    "init_params",
    "model_forward",
    "parameter_shapes",
]
