"""Block-diagonal batches of region graphs."""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..exceptions import InputError
from ..graphs.rag import RegionGraph


@dataclass(frozen=True, eq=False)
class GraphBatch:
    """Several graphs packed as one disjoint union.

    Graph ``g`` owns node rows ``node_offsets[g]:node_offsets[g+1]`` and edge
    rows ``edge_offsets[g]:edge_offsets[g+1]``; edge endpoints are global row
    numbers.
    """

    node_features: np.ndarray
    edges: np.ndarray
    membership: np.ndarray
    labels: np.ndarray
    node_offsets: np.ndarray
    edge_offsets: np.ndarray

    @classmethod
    def from_graphs(cls, graphs: Sequence[RegionGraph]) -> "GraphBatch":
        if not graphs:
            raise InputError("cannot batch an empty list of graphs")
        node_counts = np.array([g.num_nodes for g in graphs], dtype=np.int64)
        edge_counts = np.array([g.num_edges for g in graphs], dtype=np.int64)
        node_offsets = np.concatenate([[0], np.cumsum(node_counts)])
        edge_offsets = np.concatenate([[0], np.cumsum(edge_counts)])
        features = np.concatenate([g.node_features for g in graphs], axis=0)
        edges = np.concatenate([g.edges + node_offsets[i] for i, g in enumerate(graphs)],
                               axis=0).reshape(-1, 2)
        membership = np.repeat(np.arange(len(graphs), dtype=np.int64), node_counts)
        labels = np.array([g.label for g in graphs], dtype=np.int64)
        return cls(features.astype(np.float32), edges.astype(np.int64), membership,
                   labels, node_offsets, edge_offsets)

    @property
    def num_graphs(self) -> int:
        return int(len(self.labels))

    @property
    def num_nodes(self) -> int:
        return int(self.node_features.shape[0])

    def graph_size(self, g: int) -> int:
        return int(self.node_offsets[g + 1] - self.node_offsets[g])

    def graph_edges(self, g: int) -> np.ndarray:
        """Edges of graph ``g`` in its own node numbering."""
        local = self.edges[self.edge_offsets[g]:self.edge_offsets[g + 1]]
        return local - self.node_offsets[g]
