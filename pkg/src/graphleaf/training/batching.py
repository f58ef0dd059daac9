"""Mini-batching of region graphs."""

from typing import List, Sequence, Union

import numpy as np

from ..graphs.rag import RegionGraph
from ..models.batch import GraphBatch
from ..utils.validation import validate_positive_integer


def batch_order(num_graphs: int, shuffle: bool,
                seed: Union[int, np.random.Generator, None] = None) -> np.ndarray:
    if not shuffle:
        return np.arange(num_graphs)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return rng.permutation(num_graphs)


def make_batches(graphs: Sequence[RegionGraph], batch_size: int = 32, shuffle: bool = False,
                 seed: Union[int, np.random.Generator, None] = None) -> List[GraphBatch]:
    """Consecutive runs of at most ``batch_size`` graphs; the last one may be short.

    ``seed`` may be an int or a live generator (which is advanced).
    """
    validate_positive_integer(batch_size, "batch_size")
    if not graphs:
        return []
    order = batch_order(len(graphs), shuffle, seed)
    return [GraphBatch.from_graphs([graphs[i] for i in order[start:start + batch_size]])
            for start in range(0, len(order), batch_size)]
