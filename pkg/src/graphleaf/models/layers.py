"""Graph convolution, graph attention and readout layers."""

from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from ..exceptions import InputError
from ..nn import functional as F
from ..nn.tensor import Tensor

HeadParams = Tuple[Tensor, Tensor, Tensor]


def _check_edges(edges: np.ndarray, n: int) -> np.ndarray:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(edges) and (edges.min() < 0 or edges.max() >= n):
        raise InputError(f"edge endpoint out of range for {n} nodes")
    return edges


def normalize_adjacency(edges: np.ndarray, n: int) -> sparse.csr_matrix:
    """D^-1/2 (A + I) D^-1/2 for the symmetric 0/1 adjacency A of ``edges``."""
    edges = _check_edges(edges, n)
    loops = np.arange(n, dtype=np.int64)
    rows = np.concatenate([edges[:, 0], edges[:, 1], loops])
    cols = np.concatenate([edges[:, 1], edges[:, 0], loops])
    adjacency = sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    adjacency.data[:] = 1.0
    degree = np.asarray(adjacency.sum(axis=1)).ravel()
    scale = sparse.diags(1.0 / np.sqrt(degree))
    normalized = (scale @ adjacency @ scale).tocsr()
    normalized.sort_indices()
    return normalized


def gcn_layer(h: Tensor, adjacency: sparse.spmatrix, weight: Tensor, bias: Tensor,
              activation: bool = True, negative_slope: float = 0.2) -> Tensor:
    """``LeakyReLU(A_hat @ H @ W + b)``, or the pre-activation when ``activation`` is off."""
    if h.shape[1] != weight.shape[0]:
        raise InputError(f"features of width {h.shape[1]} do not fit weight {weight.shape}")
    if bias.shape != (weight.shape[1],):
        raise InputError(f"bias shape {bias.shape} does not match weight {weight.shape}")
    out = F.spmm(adjacency, h @ weight) + bias
    return F.leaky_relu(out, negative_slope) if activation else out


def attention_edges(edges: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """(source, target) pairs: both directions of every edge plus one self-loop per node.

    Sorted by target, then source, so every neighbourhood is summed in
    ascending neighbour order.
    """
    edges = _check_edges(edges, n)
    loops = np.arange(n, dtype=np.int64)
    source = np.concatenate([edges[:, 0], edges[:, 1], loops])
    target = np.concatenate([edges[:, 1], edges[:, 0], loops])
    order = np.lexsort((source, target))
    return source[order], target[order]


def gat_layer(h: Tensor, edges: np.ndarray, heads: Sequence[HeadParams], concat: bool,
              negative_slope: float = 0.2,
              attention: Optional[List[np.ndarray]] = None) -> Tensor:
    """Multi-head attention over each node's neighbours and itself.

    Each head is ``(W, a_target, a_source)``; the score of source j at target
    i is ``LeakyReLU(a_target . W h_i + a_source . W h_j)``. Heads are
    concatenated when ``concat`` is set and averaged otherwise. When
    ``attention`` is a list, the per-head weights (aligned with
    ``attention_edges``) are appended to it.
    """
    n = h.shape[0]
    source, target = attention_edges(edges, n)
    outputs = []
    for weight, att_target, att_source in heads:
        if h.shape[1] != weight.shape[0]:
            raise InputError(f"features of width {h.shape[1]} do not fit weight {weight.shape}")
        if att_target.shape != (weight.shape[1], 1) or att_source.shape != (weight.shape[1], 1):
            raise InputError(f"attention vectors must have shape ({weight.shape[1]}, 1)")
        projected = h @ weight
        scores = (F.index_select(projected @ att_target, target)
                  + F.index_select(projected @ att_source, source))
        alpha = F.segment_softmax(F.leaky_relu(scores, negative_slope), target, n)
        if attention is not None:
            attention.append(alpha.data[:, 0].copy())
        messages = F.index_select(projected, source) * alpha
        outputs.append(F.segment_sum(messages, target, n))
    if len(outputs) == 1:
        return outputs[0]
    return F.concat(outputs, axis=1) if concat else F.mean_of(outputs)


def readout(h: Tensor, membership: np.ndarray, num_graphs: int, mode: str = 'mean') -> Tensor:
    """One row per graph: mean (default) or max of its node rows."""
    if mode == 'mean':
        return F.segment_mean(h, membership, num_graphs)
    if mode == 'max':
        return F.segment_max(h, membership, num_graphs)
    raise InputError(f"Unknown readout '{mode}'. Available options: mean, max")


def readout_mean(h: Tensor, membership: np.ndarray, num_graphs: int) -> Tensor:
    return readout(h, membership, num_graphs, 'mean')
