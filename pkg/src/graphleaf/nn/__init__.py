"""Minimal numeric kernel: tensors, differentiable ops, initialisation and Adam."""

from .tensor import Function, Tensor, is_grad_enabled, no_grad
from .functional import (
    concat,
    cross_entropy_per_sample,
    index_select,
    leaky_relu,
    log_softmax,
    matmul,
    segment_max,
    segment_mean,
    segment_softmax,
    segment_sum,
    softmax,
    softmax_cross_entropy,
    spmm,
)
from .init import he_bound, he_uniform_init
from .optim import Adam, ParamSet, adam_step
from .gradcheck import finite_diff_gradcheck
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "Function",
    "Tensor",
    "is_grad_enabled",
    "no_grad",
    "concat",
    "cross_entropy_per_sample",
    "index_select",
    "leaky_relu",
    "log_softmax",
    "matmul",
    "segment_max",
    "segment_mean",
    "segment_softmax",
    "segment_sum",
    "softmax",
    "softmax_cross_entropy",
    "spmm",
    "he_bound",
    "he_uniform_init",
    "Adam",
    "ParamSet",
    "adam_step",
    "finite_diff_gradcheck",
    "load_checkpoint",
    "save_checkpoint",
]
