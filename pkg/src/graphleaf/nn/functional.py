"""Differentiable primitives.

Segment operations reduce rows of a tensor into ``num_segments`` buckets given
one segment id per row; they back message passing, attention normalisation
and graph readout. Reductions go through scipy sparse indicator matrices so
the summation order is fixed.
"""

from typing import Sequence

import numpy as np
from scipy import sparse

from ..exceptions import InputError
from .tensor import Function, Tensor

DEFAULT_NEGATIVE_SLOPE = 0.2


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _indicator(segment_ids: np.ndarray, num_segments: int, dtype) -> sparse.csr_matrix:
    """(num_segments, rows) 0/1 matrix with a one at (segment_ids[r], r)."""
    rows = len(segment_ids)
    return sparse.csr_matrix(
        (np.ones(rows, dtype=dtype), (segment_ids, np.arange(rows))),
        shape=(num_segments, rows),
    )


def _check_segments(segment_ids: np.ndarray, rows: int, num_segments: int) -> np.ndarray:
    segment_ids = np.asarray(segment_ids, dtype=np.int64)
    if segment_ids.shape != (rows,):
        raise InputError(f"expected {rows} segment ids, got shape {segment_ids.shape}")
    if rows and (segment_ids.min() < 0 or segment_ids.max() >= num_segments):
        raise InputError(f"segment id out of range for {num_segments} segments")
    return segment_ids


class Add(Function):
    def forward(self, a, b):
        return a + b

    def backward(self, grad):
        a, b = self.parents
        return _unbroadcast(grad, a.shape), _unbroadcast(grad, b.shape)


class Sub(Function):
    def forward(self, a, b):
        return a - b

    def backward(self, grad):
        a, b = self.parents
        return _unbroadcast(grad, a.shape), -_unbroadcast(grad, b.shape)


class Mul(Function):
    def forward(self, a, b):
        return a * b

    def backward(self, grad):
        a, b = self.parents
        return (_unbroadcast(grad * b.data, a.shape),
                _unbroadcast(grad * a.data, b.shape))


class MatMul(Function):
    def forward(self, a, b):
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise InputError(f"cannot multiply shapes {a.shape} and {b.shape}")
        return a @ b

    def backward(self, grad):
        a, b = self.parents
        return grad @ b.data.T, a.data.T @ grad


class SumAll(Function):
    def forward(self, x):
        return np.asarray(x.sum(), dtype=x.dtype)

    def backward(self, grad):
        (x,) = self.parents
        return (np.full(x.shape, grad, dtype=x.dtype),)


class LeakyReLU(Function):
    """max(x, slope * x); the gradient at exactly 0 is ``slope``."""

    def forward(self, x, slope=DEFAULT_NEGATIVE_SLOPE):
        positive = x > 0
        self.save_for_backward(positive, slope)
        return np.where(positive, x, x * x.dtype.type(slope))

    def backward(self, grad):
        positive, slope = self.saved
        return (np.where(positive, grad, grad * grad.dtype.type(slope)),)


class IndexSelect(Function):
    """Rows ``x[index]``."""

    def forward(self, x, index):
        index = np.asarray(index, dtype=np.int64)
        if index.size and (index.min() < 0 or index.max() >= x.shape[0]):
            raise InputError(f"row index out of range for {x.shape[0]} rows")
        self.save_for_backward(index, x.shape[0])
        return x[index]

    def backward(self, grad):
        index, rows = self.saved
        return (_indicator(index, rows, grad.dtype) @ grad,)


class SegmentSum(Function):
    def forward(self, x, segment_ids, num_segments):
        segment_ids = _check_segments(segment_ids, x.shape[0], num_segments)
        self.save_for_backward(segment_ids)
        return np.asarray(_indicator(segment_ids, num_segments, x.dtype) @ x, dtype=x.dtype)

    def backward(self, grad):
        (segment_ids,) = self.saved
        return (grad[segment_ids],)


class SegmentMean(Function):
    def forward(self, x, segment_ids, num_segments):
        segment_ids = _check_segments(segment_ids, x.shape[0], num_segments)
        counts = np.bincount(segment_ids, minlength=num_segments)
        if np.any(counts == 0):
            empty = int(np.flatnonzero(counts == 0)[0])
            raise InputError(f"segment {empty} has no rows (graph with zero nodes)")
        counts = counts.astype(x.dtype).reshape((-1,) + (1,) * (x.ndim - 1))
        self.save_for_backward(segment_ids, counts)
        total = _indicator(segment_ids, num_segments, x.dtype) @ x
        return np.asarray(total / counts, dtype=x.dtype)

    def backward(self, grad):
        segment_ids, counts = self.saved
        return ((grad / counts)[segment_ids],)


class SegmentMax(Function):
    """Per-segment maximum; ties send the gradient to the lowest row."""

    def forward(self, x, segment_ids, num_segments):
        segment_ids = _check_segments(segment_ids, x.shape[0], num_segments)
        counts = np.bincount(segment_ids, minlength=num_segments)
        if np.any(counts == 0):
            empty = int(np.flatnonzero(counts == 0)[0])
            raise InputError(f"segment {empty} has no rows (graph with zero nodes)")
        flat = x.reshape(x.shape[0], -1)
        out = np.full((num_segments, flat.shape[1]), -np.inf, dtype=x.dtype)
        np.maximum.at(out, segment_ids, flat)
        rows = np.arange(flat.shape[0])[:, None]
        candidates = np.where(flat == out[segment_ids], rows, flat.shape[0])
        winner = np.full(out.shape, flat.shape[0], dtype=np.int64)
        np.minimum.at(winner, segment_ids, candidates)
        self.save_for_backward(winner, x.shape)
        return out.reshape((num_segments,) + x.shape[1:])

    def backward(self, grad):
        winner, shape = self.saved
        flat_grad = grad.reshape(grad.shape[0], -1)
        result = np.zeros((shape[0], flat_grad.shape[1]), dtype=grad.dtype)
        cols = np.broadcast_to(np.arange(flat_grad.shape[1]), winner.shape)
        np.add.at(result, (winner.ravel(), cols.ravel()), flat_grad.ravel())
        return (result.reshape(shape),)


class SegmentSoftmax(Function):
    """Softmax over the rows of each segment, independently per column."""

    def forward(self, x, segment_ids, num_segments):
        segment_ids = _check_segments(segment_ids, x.shape[0], num_segments)
        peak = np.full((num_segments,) + x.shape[1:], -np.inf, dtype=x.dtype)
        np.maximum.at(peak, segment_ids, x)
        shifted = np.exp(x - peak[segment_ids])
        indicator = _indicator(segment_ids, num_segments, x.dtype)
        denom = np.asarray(indicator @ shifted, dtype=x.dtype)
        alpha = shifted / denom[segment_ids]
        self.save_for_backward(segment_ids, indicator, alpha)
        return alpha

    def backward(self, grad):
        segment_ids, indicator, alpha = self.saved
        weighted = np.asarray(indicator @ (alpha * grad), dtype=grad.dtype)
        return (alpha * (grad - weighted[segment_ids]),)


class Concat(Function):
    def forward(self, *arrays, axis=1):
        self.save_for_backward(axis, [a.shape[axis] for a in arrays])
        return np.concatenate(arrays, axis=axis)

    def backward(self, grad):
        axis, sizes = self.saved
        return tuple(np.split(grad, np.cumsum(sizes)[:-1], axis=axis))


class SpMM(Function):
    """``matrix @ x`` for a constant scipy sparse ``matrix``."""

    def forward(self, x, matrix):
        if matrix.shape[1] != x.shape[0]:
            raise InputError(f"operator of shape {matrix.shape} cannot act on {x.shape[0]} rows")
        matrix = sparse.csr_matrix(matrix, dtype=x.dtype)
        self.save_for_backward(matrix)
        return np.asarray(matrix @ x, dtype=x.dtype)

    def backward(self, grad):
        (matrix,) = self.saved
        return (np.asarray(matrix.T @ grad, dtype=grad.dtype),)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise log softmax with max subtraction."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits))


def _check_labels(logits: np.ndarray, labels) -> np.ndarray:
    if logits.ndim != 2:
        raise InputError(f"logits must be (B, C), got shape {logits.shape}")
    batch, classes = logits.shape
    if classes < 2:
        raise InputError(f"cross-entropy needs at least 2 classes, got {classes}")
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if labels.shape != (batch,):
        raise InputError(f"expected {batch} labels, got {labels.shape[0]}")
    if batch and (labels.min() < 0 or labels.max() >= classes):
        bad = labels[(labels < 0) | (labels >= classes)][0]
        raise InputError(f"label {bad} out of range for {classes} classes")
    return labels


def cross_entropy_per_sample(logits: np.ndarray, labels) -> np.ndarray:
    """-log softmax(logits)[i, labels[i]] for every row."""
    labels = _check_labels(logits, labels)
    return -log_softmax(logits)[np.arange(len(labels)), labels]


class SoftmaxCrossEntropy(Function):
    """Mean cross-entropy over the batch; gradient (softmax - onehot) / B."""

    def forward(self, logits, labels):
        labels = _check_labels(logits, labels)
        if len(labels) == 0:
            raise InputError("cross-entropy over an empty batch")
        logp = log_softmax(logits)
        probs = np.exp(logp)
        self.save_for_backward(labels, probs)
        return np.asarray(-logp[np.arange(len(labels)), labels].mean(), dtype=logits.dtype)

    def backward(self, grad):
        labels, probs = self.saved
        delta = probs.copy()
        delta[np.arange(len(labels)), labels] -= 1
        return (grad * delta / len(labels),)


def add(a, b) -> Tensor:
    return Add.apply(a, b)


def sub(a, b) -> Tensor:
    return Sub.apply(a, b)


def mul(a, b) -> Tensor:
    return Mul.apply(a, b)


def matmul(a, b) -> Tensor:
    return MatMul.apply(a, b)


def sum_all(x) -> Tensor:
    return SumAll.apply(x)


def leaky_relu(x, slope: float = DEFAULT_NEGATIVE_SLOPE) -> Tensor:
    if slope < 0:
        raise InputError(f"leaky ReLU slope must be >= 0, got {slope}")
    return LeakyReLU.apply(x, slope=slope)


def index_select(x, index) -> Tensor:
    return IndexSelect.apply(x, index=index)


def segment_sum(x, segment_ids, num_segments: int) -> Tensor:
    return SegmentSum.apply(x, segment_ids=segment_ids, num_segments=num_segments)


def segment_mean(x, segment_ids, num_segments: int) -> Tensor:
    return SegmentMean.apply(x, segment_ids=segment_ids, num_segments=num_segments)


def segment_max(x, segment_ids, num_segments: int) -> Tensor:
    return SegmentMax.apply(x, segment_ids=segment_ids, num_segments=num_segments)


def segment_softmax(x, segment_ids, num_segments: int) -> Tensor:
    return SegmentSoftmax.apply(x, segment_ids=segment_ids, num_segments=num_segments)


def concat(tensors: Sequence[Tensor], axis: int = 1) -> Tensor:
    return Concat.apply(*tensors, axis=axis)


def spmm(matrix, x) -> Tensor:
    return SpMM.apply(x, matrix=matrix)


def softmax_cross_entropy(logits, labels) -> Tensor:
    return SoftmaxCrossEntropy.apply(logits, labels=labels)


def mean_of(tensors: Sequence[Tensor]) -> Tensor:
    """Elementwise average of same-shaped tensors."""
    total = tensors[0]
    for t in tensors[1:]:
        total = add(total, t)
    return mul(total, 1.0 / len(tensors))
