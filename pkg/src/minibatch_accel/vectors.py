"""Dense and sparse vector primitives shared by the whole library.

All values are 64-bit floats and immutable after construction.  Inner
products and squared norms are accumulated in ascending index order, so
single-threaded results are reproducible bit for bit.  Sparse indices are
1-based, matching the on-disk LIBSVM convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import kernels

__all__ = ["DenseVector", "SparseVector", "dot", "axpy", "norm", "as_dense_array"]


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DenseVector:
    """Immutable dense float64 vector."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.entries, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] < 1:
            raise ValueError("a dense vector needs at least one entry")
        if not np.all(np.isfinite(arr)):
            raise ValueError("dense vector entries must be finite")
        object.__setattr__(self, "entries", _freeze(arr))

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    @property
    def array(self) -> np.ndarray:
        return self.entries

    def __len__(self) -> int:
        return self.dimension

    def __getitem__(self, i):
        return self.entries[i]


@dataclass(frozen=True)
class SparseVector:
    """Immutable sparse vector: strictly increasing 1-based indices, nonzero values."""

    indices: np.ndarray
    values: np.ndarray
    dimension: int

    def __post_init__(self):
        idx = np.ascontiguousarray(self.indices, dtype=np.int64)
        val = np.ascontiguousarray(self.values, dtype=np.float64)
        if idx.ndim != 1 or val.ndim != 1 or idx.shape[0] != val.shape[0]:
            raise ValueError("indices and values must be 1-d and of equal length")
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if idx.shape[0] > 0:
            if idx[0] < 1 or idx[-1] > self.dimension:
                raise ValueError("indices must lie in [1, dimension]")
            if np.any(np.diff(idx) <= 0):
                raise ValueError("indices must be strictly increasing")
        if not np.all(np.isfinite(val)) or np.any(val == 0.0):
            raise ValueError("values must be finite and nonzero")
        object.__setattr__(self, "indices", _freeze(idx))
        object.__setattr__(self, "values", _freeze(val))

    @property
    def nnz(self) -> int:
        return self.indices.shape[0]

    def to_dense(self) -> DenseVector:
        out = np.zeros(self.dimension)
        out[self.indices - 1] = self.values
        return DenseVector(out)


Vector = Union[DenseVector, SparseVector]


def as_dense_array(x) -> np.ndarray:
    """Coerce a DenseVector or array-like to a contiguous float64 ndarray."""
    if isinstance(x, DenseVector):
        return x.entries
    return np.ascontiguousarray(x, dtype=np.float64)


def dot(a: Vector, b: DenseVector) -> float:
    """Inner product <a, b>; b must be dense.  Summation ascends by index."""
    barr = as_dense_array(b)
    if isinstance(a, SparseVector):
        if a.dimension != barr.shape[0]:
            raise ValueError(
                "dimension mismatch: %d vs %d" % (a.dimension, barr.shape[0])
            )
        return float(kernels.seq_sparse_dot(a.indices - 1, a.values, barr))
    aarr = as_dense_array(a)
    if aarr.shape[0] != barr.shape[0]:
        raise ValueError("dimension mismatch: %d vs %d" % (aarr.shape[0], barr.shape[0]))
    return float(kernels.seq_dot(aarr, barr))


def axpy(alpha: float, x: Vector, y: DenseVector) -> DenseVector:
    """Return y + alpha * x; y is left unmodified."""
    yarr = as_dense_array(y)
    if isinstance(x, SparseVector):
        if x.dimension != yarr.shape[0]:
            raise ValueError(
                "dimension mismatch: %d vs %d" % (x.dimension, yarr.shape[0])
            )
        out = yarr.copy()
        out[x.indices - 1] += alpha * x.values
        return DenseVector(out)
    xarr = as_dense_array(x)
    if xarr.shape[0] != yarr.shape[0]:
        raise ValueError("dimension mismatch: %d vs %d" % (xarr.shape[0], yarr.shape[0]))
    return DenseVector(yarr + alpha * xarr)


def norm(x: Vector, which: str = "two") -> float:
    """Vector norm: "two", "one" or "inf".

    The two-norm sums squares in ascending index order before the root.
    """
    if isinstance(x, SparseVector):
        arr = x.values
    else:
        arr = as_dense_array(x)
    if which == "two":
        return math.sqrt(kernels.seq_dot(arr, arr))
    if which == "one":
        total = 0.0
        for v in arr.tolist():
            total += abs(v)
        return total
    if which == "inf":
        if arr.shape[0] == 0:
            return 0.0
        return float(np.max(np.abs(arr)))
    raise ValueError("unknown norm %r" % (which,))
