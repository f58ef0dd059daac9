"""Training-time stochastic edge augmentation.

Per graph and per epoch: with probability ``p`` one uniformly random missing
edge is inserted; then, independently with probability ``p``, one uniformly
random edge of the (possibly grown) edge set is removed. Both gates are drawn
on every call so the random stream advances identically whatever the graph.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..graphs.rag import canonical_edges
from ..utils.validation import validate_probability

Edge = Tuple[int, int]

# Above this edge density, non-edges are enumerated instead of rejection-sampled.
_DENSE_THRESHOLD = 0.5


@dataclass(frozen=True)
class AugmentationOutcome:
    edges: np.ndarray
    added: Optional[Edge] = None
    removed: Optional[Edge] = None


def _random_non_edge(existing: set, n: int, num_edges: int,
                     rng: np.random.Generator) -> Edge:
    max_edges = n * (n - 1) // 2
    if num_edges / max_edges <= _DENSE_THRESHOLD:
        while True:
            u, v = (int(x) for x in rng.integers(0, n, size=2))
            if u == v:
                continue
            pair = (min(u, v), max(u, v))
            if pair not in existing:
                return pair
    rows, cols = np.triu_indices(n, k=1)
    free = [(int(u), int(v)) for u, v in zip(rows, cols) if (int(u), int(v)) not in existing]
    return free[int(rng.integers(0, len(free)))]


def augment_edges_traced(edges: np.ndarray, n: int, p: float,
                         rng: np.random.Generator) -> AugmentationOutcome:
    """``augment_edges`` that also reports which edge was added and removed."""
    validate_probability(p, "p")
    edges = canonical_edges(edges)
    if n < 2:
        return AugmentationOutcome(edges)

    do_add = rng.random() < p
    do_remove = rng.random() < p

    current = [tuple(int(x) for x in pair) for pair in edges]
    existing = set(current)
    added = removed = None

    if do_add and len(current) < n * (n - 1) // 2:
        added = _random_non_edge(existing, n, len(current), rng)
        current.append(added)
        existing.add(added)

    if do_remove and current:
        removed = current.pop(int(rng.integers(0, len(current))))

    if added is None and removed is None:
        return AugmentationOutcome(edges)
    return AugmentationOutcome(canonical_edges(np.array(current, dtype=np.int64)), added, removed)


def augment_edges(edges: np.ndarray, n: int, p: float,
                  rng: np.random.Generator) -> np.ndarray:
    """Randomly add one edge and/or remove one edge of an ``n``-node graph."""
    return augment_edges_traced(edges, n, p, rng).edges
