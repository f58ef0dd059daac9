"""Weight initialisation."""

import math
from typing import Sequence, Union

import numpy as np

from ..exceptions import InputError
from .tensor import Tensor


def he_bound(n_in: int) -> float:
    return math.sqrt(6.0 / n_in)


def he_uniform_init(shape: Union[int, Sequence[int]], n_in: int,
                    rng: np.random.Generator, dtype=np.float32) -> Tensor:
    """I.i.d. uniform on [-sqrt(6/n_in), +sqrt(6/n_in)], as a trainable tensor.

    Draws are made in float64 and rounded to ``dtype``; rounding never pushes
    a value past the bound.
    """
    if isinstance(n_in, bool) or not isinstance(n_in, (int, np.integer)) or n_in < 1:
        raise InputError(f"n_in must be a positive integer, got {n_in!r}")
    bound = he_bound(int(n_in))
    values = rng.uniform(-bound, bound, size=shape).astype(dtype)
    cap = np.asarray(bound, dtype=dtype)
    if float(cap) > bound:
        cap = np.nextafter(cap, np.asarray(0, dtype=dtype))
    return Tensor(np.clip(values, -cap, cap), requires_grad=True)


def zeros(shape: Union[int, Sequence[int]], dtype=np.float32) -> Tensor:
    return Tensor(np.zeros(shape, dtype=dtype), requires_grad=True)
