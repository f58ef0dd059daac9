"""Dense tensors with tape-based reverse-mode differentiation.

Every differentiable primitive is a ``Function`` subclass with a numpy
``forward`` and a ``backward`` that maps the output gradient to one gradient
per input. ``Function.apply`` records the call on the output tensor so
``Tensor.backward`` can replay the tape in reverse topological order.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from typing import Any, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import InputError

_FLOAT_TYPES = (np.float32, np.float64)
_state = threading.local()


def is_grad_enabled() -> bool:
    return getattr(_state, "grad_enabled", True)


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable tape recording in the current thread."""
    previous = is_grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


class Tensor:
    """A float32 or float64 array, optionally tracking gradients."""

    __slots__ = ("data", "requires_grad", "grad", "_ctx")
    __array_priority__ = 100

    def __init__(self, data: Any, requires_grad: bool = False,
                 dtype: Optional[np.dtype] = None):
        array = np.asarray(data, dtype=dtype)
        if array.dtype.type not in _FLOAT_TYPES:
            array = array.astype(np.float32)
        self.data: np.ndarray = array
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self._ctx: Optional[Function] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def is_leaf(self) -> bool:
        return self._ctx is None

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        from .functional import add
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from .functional import sub
        return sub(self, other)

    def __rsub__(self, other):
        from .functional import sub
        return sub(other, self)

    def __mul__(self, other):
        from .functional import mul
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        from .functional import mul
        return mul(self, -1.0)

    def __matmul__(self, other):
        from .functional import matmul
        return matmul(self, other)

    def sum(self) -> "Tensor":
        from .functional import sum_all
        return sum_all(self)

    def backward(self, grad: Optional[np.ndarray] = None) -> None:
        """Accumulate d(self)/d(leaf) into ``leaf.grad`` for every tracked leaf."""
        if not self.requires_grad:
            raise InputError("backward() called on a tensor that does not require grad")
        if grad is None:
            if self.data.size != 1:
                raise InputError("backward() without a gradient needs a scalar tensor")
            grad = np.ones_like(self.data)
        grads = {id(self): np.asarray(grad, dtype=self.dtype)}

        for node in _topological_order(self):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._ctx is None:
                node.grad = g.copy() if node.grad is None else node.grad + g
                continue
            parent_grads = node._ctx.backward(g)
            for parent, pg in zip(node._ctx.parents, parent_grads):
                if pg is None or not parent.requires_grad:
                    continue
                pg = np.asarray(pg, dtype=parent.dtype)
                key = id(parent)
                grads[key] = pg if key not in grads else grads[key] + pg


def _topological_order(root: Tensor) -> List[Tensor]:
    """Nodes reachable from ``root`` through tracked inputs, outputs first."""
    order: List[Tensor] = []
    visited = set()
    stack: List[Tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        if node._ctx is not None:
            for parent in node._ctx.parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
    order.reverse()
    return order


def as_tensor(value: Any, dtype: Optional[np.dtype] = None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value, dtype=dtype)


class Function:
    """One recorded application of a differentiable primitive."""

    def __init__(self, *parents: Tensor):
        self.parents: Sequence[Tensor] = parents
        self.saved: Tuple[Any, ...] = ()

    def save_for_backward(self, *values: Any) -> None:
        self.saved = values

    def forward(self, *arrays: np.ndarray, **kwargs: Any) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        raise NotImplementedError

    @classmethod
    def apply(cls, *inputs: Any, **kwargs: Any) -> Tensor:
        """Run ``forward`` on the inputs' arrays and record the call if needed.

        Non-tensor inputs become constants of the first tensor input's dtype.
        """
        dtype = next((x.dtype for x in inputs if isinstance(x, Tensor)), None)
        tensors = [as_tensor(x, dtype) for x in inputs]
        fn = cls(*tensors)
        out = fn.forward(*(t.data for t in tensors), **kwargs)
        track = is_grad_enabled() and any(t.requires_grad for t in tensors)
        result = Tensor(out, requires_grad=track)
        if track:
            result._ctx = fn
        return result
