"""Smooth non-negative convex losses over sparse linear predictors.

Two kinds are provided.  The smoothed hinge on the margin m = y * (w . x):

    value = 0.5 - m        for m <= 0
          = 0.5 (1 - m)^2  for 0 < m <= 1
          = 0              for m > 1

and the squared loss 0.5 (w . x - y)^2, which has closed-form minimizers
and is convenient in tests.  Both are 1-smooth in the raw score w . x, so
H = max_t ||x_t||^2 is a valid smoothness constant over a dataset; it is
exposed explicitly rather than guessed.  Nonnegativity plus H-smoothness
gives the gradient-norm bound ||grad|| <= sqrt(4 H value), checked by
:func:`self_bound_residual`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .dataio import Dataset, Example, pack_examples
from .vectors import DenseVector, as_dense_array

__all__ = [
    "LOSS_KINDS",
    "LossModel",
    "MiniBatch",
    "loss_value",
    "loss_gradient",
    "minibatch_value_grad",
    "dataset_loss",
    "self_bound_residual",
    "estimate_smoothness",
]

LOSS_KINDS = ("smoothed_hinge", "squared")
_KIND_CODE = {"smoothed_hinge": kernels.SMOOTHED_HINGE, "squared": kernels.SQUARED}


@dataclass(frozen=True)
class LossModel:
    """A loss kind together with its smoothness constant."""

    kind: str
    smoothness: float

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError("unknown loss kind %r" % (self.kind,))
        if not (self.smoothness > 0 and math.isfinite(self.smoothness)):
            raise ValueError("smoothness must be a positive finite number")

    @property
    def kind_code(self) -> int:
        return _KIND_CODE[self.kind]


@dataclass(frozen=True)
class MiniBatch:
    """A contiguous block of examples whose loss terms are averaged."""

    examples: tuple[Example, ...]

    def __post_init__(self):
        object.__setattr__(self, "examples", tuple(self.examples))
        if not self.examples:
            raise ValueError("a mini-batch needs at least one example")

    @property
    def batch_size(self) -> int:
        return len(self.examples)


def _score_terms(model: LossModel, w: np.ndarray, z: Example):
    # (value, gradient coefficient on x) at the raw score s = w . x
    s = kernels.seq_sparse_dot(z.features.indices - 1, z.features.values, w)
    y = float(z.label)
    if model.kind == "smoothed_hinge":
        m = y * s
        if m <= 0.0:
            return 0.5 - m, -y
        if m > 1.0:
            return 0.0, 0.0
        q = 1.0 - m
        return 0.5 * q * q, -q * y
    r = s - y
    return 0.5 * r * r, r


def loss_value(model: LossModel, w, z: Example) -> float:
    """Instantaneous loss at predictor w on example z."""
    warr = as_dense_array(w)
    if z.features.dimension != warr.shape[0]:
        raise ValueError("dimension mismatch: %d vs %d" % (z.features.dimension, warr.shape[0]))
    return float(_score_terms(model, warr, z)[0])


def loss_gradient(model: LossModel, w, z: Example) -> DenseVector:
    """Gradient of the loss with respect to w (dense)."""
    warr = as_dense_array(w)
    if z.features.dimension != warr.shape[0]:
        raise ValueError("dimension mismatch: %d vs %d" % (z.features.dimension, warr.shape[0]))
    _, g = _score_terms(model, warr, z)
    out = np.zeros(warr.shape[0])
    out[z.features.indices - 1] = g * z.features.values
    return DenseVector(out)


def minibatch_value_grad(model: LossModel, w, batch, deterministic: bool = True):
    """Mean loss and mean gradient over a mini-batch.

    With ``deterministic`` the reduction uses a fixed pairwise tree, so the
    result is bit-identical run to run regardless of worker count; without
    it the backend may reduce in any order.
    """
    if isinstance(batch, MiniBatch):
        examples: Sequence[Example] = batch.examples
    else:
        examples = tuple(batch)
        if not examples:
            raise ValueError("a mini-batch needs at least one example")
    warr = as_dense_array(w)
    for z in examples:
        if z.features.dimension != warr.shape[0]:
            raise ValueError("dimension mismatch in mini-batch")
    packed = pack_examples(examples)
    out = np.zeros(warr.shape[0])
    value = kernels.batch_value_grad(
        packed.indptr, packed.indices, packed.values, packed.labels,
        warr, 0, len(examples), model.kind_code, deterministic, out,
    )
    return float(value), DenseVector(out)


def dataset_loss(model: LossModel, w, dataset: Dataset) -> float:
    """Mean loss over a whole dataset (fast, unordered reduction)."""
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    packed = dataset.packed
    return float(kernels.mean_loss(
        packed.indptr, packed.indices, packed.values, packed.labels,
        as_dense_array(w), model.kind_code, 0, len(dataset),
    ))


def self_bound_residual(model: LossModel, w, z: Example) -> float:
    """sqrt(4 H value) - ||gradient||_2; nonnegative whenever H is valid."""
    warr = as_dense_array(w)
    value, g = _score_terms(model, warr, z)
    grad_norm = abs(g) * math.sqrt(kernels.seq_dot(z.features.values, z.features.values))
    return math.sqrt(4.0 * model.smoothness * value) - grad_norm


def estimate_smoothness(kind: str, dataset: Dataset) -> float:
    """Smoothness surrogate for a dataset: max_t ||x_t||^2.

    Valid for both loss kinds because each is 1-smooth in the raw score of
    a linear predictor.
    """
    if kind not in LOSS_KINDS:
        raise ValueError("unknown loss kind %r" % (kind,))
    if len(dataset) == 0:
        raise ValueError("cannot estimate smoothness from an empty dataset")
    packed = dataset.packed
    return float(kernels.max_sq_row_norm(packed.indptr, packed.values))
