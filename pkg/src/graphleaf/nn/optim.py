"""Named parameter sets and the Adam optimiser."""

from __future__ import annotations

from typing import Dict, Iterator, List, Mapping, Optional, Tuple

import numpy as np

from ..exceptions import InputError, NumericError
from .tensor import Tensor


class ParamSet:
    """Ordered ``name -> Tensor`` map plus Adam state (m, v per parameter, shared t)."""

    def __init__(self, tensors: Optional[Mapping[str, Tensor]] = None):
        self._params: Dict[str, Tensor] = {}
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}
        self.t = 0
        for name, tensor in (tensors or {}).items():
            self[name] = tensor

    def __setitem__(self, name: str, tensor: Tensor) -> None:
        if not isinstance(tensor, Tensor):
            tensor = Tensor(tensor)
        tensor.requires_grad = True
        self._params[name] = tensor
        self.m[name] = np.zeros_like(tensor.data)
        self.v[name] = np.zeros_like(tensor.data)

    def __getitem__(self, name: str) -> Tensor:
        try:
            return self._params[name]
        except KeyError:
            raise InputError(f"missing parameter '{name}'")

    def __contains__(self, name: object) -> bool:
        return name in self._params

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def __len__(self) -> int:
        return len(self._params)

    def names(self) -> List[str]:
        return list(self._params)

    def items(self) -> List[Tuple[str, Tensor]]:
        return list(self._params.items())

    def shapes(self) -> Dict[str, Tuple[int, ...]]:
        return {name: t.shape for name, t in self._params.items()}

    @property
    def dtype(self) -> np.dtype:
        first = next(iter(self._params.values()), None)
        return first.dtype if first is not None else np.dtype(np.float32)

    def num_parameters(self) -> int:
        return int(sum(t.data.size for t in self._params.values()))

    def zero_grad(self) -> None:
        for tensor in self._params.values():
            tensor.grad = None

    def grads(self) -> Dict[str, np.ndarray]:
        """Accumulated gradients; parameters untouched by backward get zeros."""
        return {name: (t.grad if t.grad is not None else np.zeros_like(t.data))
                for name, t in self._params.items()}

    def astype(self, dtype) -> "ParamSet":
        """Copy with parameters and moments cast to ``dtype``."""
        result = ParamSet({name: Tensor(t.data.astype(dtype)) for name, t in self.items()})
        for name in self._params:
            result.m[name] = self.m[name].astype(dtype)
            result.v[name] = self.v[name].astype(dtype)
        result.t = self.t
        return result

    def copy(self) -> "ParamSet":
        return self.astype(self.dtype)

    def state_equal(self, other: "ParamSet") -> bool:
        """Same names, values, moments and step count."""
        if self.names() != other.names() or self.t != other.t:
            return False
        return all(np.array_equal(self[n].data, other[n].data)
                   and np.array_equal(self.m[n], other.m[n])
                   and np.array_equal(self.v[n], other.v[n]) for n in self)


def adam_step(params: ParamSet, grads: Mapping[str, np.ndarray], lr: float = 1e-3,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> ParamSet:
    """One bias-corrected Adam update of every parameter, in place.

    All gradients are checked before any parameter changes.
    """
    if set(grads) != set(params.names()):
        missing = sorted(set(params.names()) - set(grads))
        extra = sorted(set(grads) - set(params.names()))
        raise InputError(f"gradient names do not match parameters "
                         f"(missing: {missing}, unexpected: {extra})")
    for name in params:
        grad = np.asarray(grads[name])
        if grad.shape != params[name].shape:
            raise InputError(f"gradient for '{name}' has shape {grad.shape}, "
                             f"expected {params[name].shape}")
        if not np.all(np.isfinite(grad)):
            raise NumericError(f"non-finite gradient for parameter '{name}'")

    params.t += 1
    t = params.t
    correction1 = 1.0 - beta1 ** t
    correction2 = 1.0 - beta2 ** t
    for name, tensor in params.items():
        dtype = tensor.dtype.type
        grad = np.asarray(grads[name], dtype=tensor.dtype)
        params.m[name] = dtype(beta1) * params.m[name] + dtype(1.0 - beta1) * grad
        params.v[name] = dtype(beta2) * params.v[name] + dtype(1.0 - beta2) * grad * grad
        m_hat = params.m[name] / dtype(correction1)
        v_hat = params.v[name] / dtype(correction2)
        tensor.data = tensor.data - dtype(lr) * m_hat / (np.sqrt(v_hat) + dtype(eps))
    return params


class Adam:
    """Optimiser object over a ``ParamSet``; the moments live on the set itself."""

    def __init__(self, params: ParamSet, lr: float = 1e-3, betas: Tuple[float, float] = (0.9, 0.999),
                 eps: float = 1e-8):
        if lr < 0:
            raise InputError(f"learning rate must be >= 0, got {lr}")
        self.params = params
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps

    def zero_grad(self) -> None:
        self.params.zero_grad()

    def step(self) -> None:
        adam_step(self.params, self.params.grads(), self.lr, self.beta1, self.beta2, self.eps)
