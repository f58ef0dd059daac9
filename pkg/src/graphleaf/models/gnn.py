"""The GCN, GAT and hybrid GCN->GAT graph classifiers.

Parameter names:

    gcn.{i}.weight, gcn.{i}.bias
    gat.{i}.head{k}.weight, gat.{i}.head{k}.att_target, gat.{i}.head{k}.att_source
    classifier.weight, classifier.bias

Layer widths for hidden width H, K heads and C classes:

    gcn:    3 -> H -> H (no activation on the last layer), readout, classifier
    gat:    3 -> K x H/K (concat) -> H (head average), readout, classifier
    hybrid: 3 -> H -> H (GCN), H -> K x H/K -> H (GAT), readout, classifier

The classifier is ``LeakyReLU(readout) @ W + b``.
"""

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..exceptions import InputError
from ..nn import functional as F
from ..nn.init import he_uniform_init, zeros
from ..nn.optim import ParamSet
from ..nn.tensor import Tensor, no_grad
from .augmentation import augment_edges
from .batch import GraphBatch
from .config import ModelConfig
from .layers import gat_layer, gcn_layer, normalize_adjacency, readout

logger = logging.getLogger(__name__)

NUM_LAYERS = 2


def _gcn_widths(cfg: ModelConfig) -> List[Tuple[int, int]]:
    return [(cfg.input_dim, cfg.hidden_dim), (cfg.hidden_dim, cfg.hidden_dim)]


def _gat_widths(cfg: ModelConfig) -> List[Tuple[int, int]]:
    """(input width, per-head output width) of both attention layers."""
    first_in = cfg.hidden_dim if cfg.uses_gcn else cfg.input_dim
    return [(first_in, cfg.hidden_dim // cfg.heads), (cfg.hidden_dim, cfg.hidden_dim)]


def parameter_shapes(cfg: ModelConfig) -> Dict[str, Tuple[int, ...]]:
    """Every parameter the config needs, in initialisation order."""
    shapes: Dict[str, Tuple[int, ...]] = {}
    if cfg.uses_gcn:
        for i, (f_in, f_out) in enumerate(_gcn_widths(cfg)):
            shapes[f"gcn.{i}.weight"] = (f_in, f_out)
            shapes[f"gcn.{i}.bias"] = (f_out,)
    if cfg.uses_gat:
        for i, (f_in, f_out) in enumerate(_gat_widths(cfg)):
            for k in range(cfg.heads):
                prefix = f"gat.{i}.head{k}"
                shapes[f"{prefix}.weight"] = (f_in, f_out)
                shapes[f"{prefix}.att_target"] = (f_out, 1)
                shapes[f"{prefix}.att_source"] = (f_out, 1)
    shapes["classifier.weight"] = (cfg.hidden_dim, cfg.num_classes)
    shapes["classifier.bias"] = (cfg.num_classes,)
    return shapes


def init_params(cfg: ModelConfig, rng: np.random.Generator, dtype=np.float32) -> ParamSet:
    """He-uniform weights and attention vectors, zero biases."""
    params = ParamSet()
    for name, shape in parameter_shapes(cfg).items():
        if name.endswith(".bias"):
            params[name] = zeros(shape, dtype)
        elif name.endswith((".att_target", ".att_source")):
            # The attention vector acts on the concatenation of two projections.
            params[name] = he_uniform_init(shape, 2 * shape[0], rng, dtype)
        else:
            params[name] = he_uniform_init(shape, shape[0], rng, dtype)
    logger.debug(f"Initialised {cfg.variant} model with {params.num_parameters()} parameters")
    return params


def check_params(params: ParamSet, cfg: ModelConfig) -> None:
    expected = parameter_shapes(cfg)
    if set(params.names()) != set(expected):
        missing = sorted(set(expected) - set(params.names()))
        extra = sorted(set(params.names()) - set(expected))
        raise InputError(f"parameters do not match the {cfg.variant} config "
                         f"(missing: {missing}, unexpected: {extra})")
    for name, shape in expected.items():
        if params[name].shape != shape:
            raise InputError(f"parameter '{name}' has shape {params[name].shape}, "
                             f"config expects {shape}")


def _augmented_edges(batch: GraphBatch, p: float, rng: np.random.Generator) -> np.ndarray:
    pieces = []
    for g in range(batch.num_graphs):
        local = augment_edges(batch.graph_edges(g), batch.graph_size(g), p, rng)
        pieces.append(local + batch.node_offsets[g])
    return np.concatenate(pieces, axis=0).reshape(-1, 2)


def _gat_heads(params: ParamSet, layer: int, heads: int):
    return [(params[f"gat.{layer}.head{k}.weight"],
             params[f"gat.{layer}.head{k}.att_target"],
             params[f"gat.{layer}.head{k}.att_source"]) for k in range(heads)]


def model_forward(batch: GraphBatch, params: ParamSet, cfg: ModelConfig, training: bool,
                  rng: Optional[np.random.Generator] = None,
                  attention: Optional[List[np.ndarray]] = None) -> Tensor:
    """Logits of shape (graphs, classes).

    With ``training`` set, every graph's edges are augmented from ``rng``
    first; otherwise the call is deterministic and ``rng`` is unused.
    """
    check_params(params, cfg)
    edges = batch.edges
    if training:
        if rng is None:
            raise InputError("training forward pass needs a random generator")
        edges = _augmented_edges(batch, cfg.edge_aug_p, rng)

    slope = cfg.negative_slope
    h = Tensor(batch.node_features.astype(params.dtype))

    if cfg.uses_gcn:
        adjacency = normalize_adjacency(edges, batch.num_nodes)
        for i in range(NUM_LAYERS):
            last_before_readout = cfg.variant == 'gcn' and i == NUM_LAYERS - 1
            h = gcn_layer(h, adjacency, params[f"gcn.{i}.weight"], params[f"gcn.{i}.bias"],
                          activation=not last_before_readout, negative_slope=slope)

    if cfg.uses_gat:
        h = gat_layer(h, edges, _gat_heads(params, 0, cfg.heads), concat=True,
                      negative_slope=slope, attention=attention)
        h = F.leaky_relu(h, slope)
        h = gat_layer(h, edges, _gat_heads(params, 1, cfg.heads), concat=False,
                      negative_slope=slope, attention=attention)

    pooled = readout(h, batch.membership, batch.num_graphs, cfg.readout)
    hidden = F.leaky_relu(pooled, slope)
    return hidden @ params["classifier.weight"] + params["classifier.bias"]


class GraphClassifier:
    """A model config bound to its parameters."""

    def __init__(self, cfg: ModelConfig, params: ParamSet):
        check_params(params, cfg)
        self.cfg = cfg
        self.params = params

    @classmethod
    def initialize(cls, cfg: ModelConfig, rng: np.random.Generator) -> "GraphClassifier":
        return cls(cfg, init_params(cfg, rng))

    def forward(self, batch: GraphBatch, training: bool = False,
                rng: Optional[np.random.Generator] = None) -> Tensor:
        return model_forward(batch, self.params, self.cfg, training, rng)

    def logits(self, batch: GraphBatch) -> np.ndarray:
        """Evaluation-mode logits without building a gradient tape."""
        with no_grad():
            return model_forward(batch, self.params, self.cfg, training=False).data

    def predict_proba(self, batch: GraphBatch) -> np.ndarray:
        return F.softmax(self.logits(batch).astype(np.float64))
