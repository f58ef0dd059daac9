"""Pytest configuration and shared fixtures."""

import pytest
import sys
from pathlib import Path

import numpy as np
from PIL import Image

# Add src directory to Python path for testing
src_path = Path(__file__).parent.parent / "src"
sys.path.insert(0, str(src_path))

from graphleaf.graphs.rag import RegionGraph, canonical_edges  # noqa: E402
from graphleaf.models.config import ModelConfig  # noqa: E402


@pytest.fixture
def small_hybrid_config():
    """A narrow hybrid model that trains in milliseconds."""
    return ModelConfig(variant='hybrid', num_classes=2, hidden_dim=8, heads=2)


@pytest.fixture
def write_image():
    """Write an 8-bit RGB array to a PNG file and return its path."""
    def _write(path, rgb):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(np.asarray(rgb, dtype=np.uint8)).save(path)
        return path
    return _write


def random_graph(rng, num_nodes, edge_prob=0.4, label=0):
    """Random graph with features in [-1, 1], kept connected by a path."""
    features = rng.uniform(-1.0, 1.0, size=(num_nodes, 3))
    pairs = [(i, i + 1) for i in range(num_nodes - 1)]
    for u in range(num_nodes):
        for v in range(u + 2, num_nodes):
            if rng.random() < edge_prob:
                pairs.append((u, v))
    return RegionGraph(features.astype(np.float32), canonical_edges(np.array(pairs)), label)


def permute_graph(graph, perm):
    """The same graph with node ``k`` of the result being node ``perm[k]`` of the input."""
    inverse = np.empty_like(perm)
    inverse[perm] = np.arange(len(perm))
    return RegionGraph(graph.node_features[perm], canonical_edges(inverse[graph.edges]),
                       graph.label)


@pytest.fixture
def make_random_graph():
    return random_graph


@pytest.fixture
def permute():
    return permute_graph
