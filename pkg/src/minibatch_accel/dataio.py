"""LIBSVM-format datasets: parsing, writing, splitting, synthesis, censoring.

The text format is one example per line, ``label idx:val idx:val ...`` with
1-based, strictly increasing indices.  Labels are +1/-1; a 0 label is read
as -1 with a warning.  Blank lines are skipped and ``#`` starts a comment.
UTF-8, LF or CRLF accepted; LF is emitted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .vectors import DenseVector, SparseVector, as_dense_array

__all__ = [
    "Example",
    "Dataset",
    "LibsvmParseError",
    "parse_libsvm",
    "write_libsvm",
    "read_libsvm",
    "save_libsvm",
    "split",
    "synthesize",
    "censor",
]


class LibsvmParseError(ValueError):
    """Malformed input; carries the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__("line %d: %s" % (lineno, message))
        self.lineno = lineno


@dataclass(frozen=True)
class Example:
    """One labeled sparse instance."""

    features: SparseVector
    label: int

    def __post_init__(self):
        if self.label not in (-1, 1):
            raise ValueError("label must be +1 or -1, got %r" % (self.label,))


class PackedData(NamedTuple):
    """CSR-style arrays consumed by the compute kernels (0-based indices)."""

    indptr: np.ndarray
    indices: np.ndarray
    values: np.ndarray
    labels: np.ndarray


def pack_examples(examples: Sequence[Example]) -> PackedData:
    m = len(examples)
    indptr = np.zeros(m + 1, dtype=np.int64)
    for i, ex in enumerate(examples):
        indptr[i + 1] = indptr[i] + ex.features.nnz
    nnz = int(indptr[-1])
    indices = np.zeros(nnz, dtype=np.int64)
    values = np.zeros(nnz)
    labels = np.zeros(m)
    for i, ex in enumerate(examples):
        lo, hi = indptr[i], indptr[i + 1]
        indices[lo:hi] = ex.features.indices - 1
        values[lo:hi] = ex.features.values
        labels[i] = ex.label
    return PackedData(indptr, indices, values, labels)


@dataclass(frozen=True)
class Dataset:
    """An ordered, immutable collection of examples in a fixed dimension."""

    examples: tuple[Example, ...]
    dimension: int
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "examples", tuple(self.examples))
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        for ex in self.examples:
            if ex.features.dimension > self.dimension:
                raise ValueError("example dimension exceeds dataset dimension")

    def __len__(self) -> int:
        return len(self.examples)

    def __getitem__(self, i) -> Example:
        return self.examples[i]

    @cached_property
    def packed(self) -> PackedData:
        return pack_examples(self.examples)

    def take(self, m: int, note: str = "") -> "Dataset":
        """First m examples, order preserved."""
        if m > len(self):
            raise ValueError("asked for %d examples, have %d" % (m, len(self)))
        return Dataset(self.examples[:m], self.dimension,
                       self.provenance + (note or "[:%d]" % m))

    def reorder(self, order: Sequence[int], note: str = "") -> "Dataset":
        return Dataset(tuple(self.examples[i] for i in order), self.dimension,
                       self.provenance + (note or "[reordered]"))


def _format_value(v: float) -> str:
    return repr(float(v))


def parse_libsvm(source, provenance: str = "<stream>") -> Dataset:
    """Parse LIBSVM text from a string, an open file, or an iterable of lines."""
    if isinstance(source, str):
        lines: Iterable[str] = source.splitlines()
    else:
        lines = source
    examples: list[Example] = []
    max_index = 0
    zero_labels = 0
    dropped_zero_values = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw
        cut = line.find("#")
        if cut >= 0:
            line = line[:cut]
        tokens = line.split()
        if not tokens:
            continue
        try:
            label_value = float(tokens[0])
        except ValueError:
            raise LibsvmParseError(lineno, "non-numeric label %r" % tokens[0]) from None
        if label_value == 1.0:
            label = 1
        elif label_value == -1.0:
            label = -1
        elif label_value == 0.0:
            label = -1
            zero_labels += 1
        else:
            raise LibsvmParseError(lineno, "label must be +1, -1 or 0, got %r" % tokens[0])
        idx_list: list[int] = []
        val_list: list[float] = []
        prev = 0
        for tok in tokens[1:]:
            head, sep, tail = tok.partition(":")
            if not sep:
                raise LibsvmParseError(lineno, "malformed feature token %r" % tok)
            try:
                index = int(head)
            except ValueError:
                raise LibsvmParseError(lineno, "non-numeric index in %r" % tok) from None
            try:
                value = float(tail)
            except ValueError:
                raise LibsvmParseError(lineno, "non-numeric value in %r" % tok) from None
            if index <= prev:
                raise LibsvmParseError(
                    lineno, "indices must be strictly increasing (%d after %d)" % (index, prev)
                )
            if not math.isfinite(value):
                raise LibsvmParseError(lineno, "non-finite value in %r" % tok)
            prev = index
            if value == 0.0:
                dropped_zero_values += 1
                continue
            idx_list.append(index)
            val_list.append(value)
        if idx_list:
            max_index = max(max_index, idx_list[-1])
        examples.append((label, idx_list, val_list))
    if not examples:
        raise LibsvmParseError(0, "no examples found")
    if zero_labels:
        warnings.warn("%d zero labels mapped to -1" % zero_labels, stacklevel=2)
    if dropped_zero_values:
        warnings.warn("%d explicit zero feature values dropped" % dropped_zero_values,
                      stacklevel=2)
    dimension = max(max_index, 1)
    built = tuple(
        Example(
            SparseVector(np.array(idx, dtype=np.int64), np.array(val), dimension),
            label,
        )
        for label, idx, val in examples
    )
    return Dataset(built, dimension, provenance)


def write_libsvm(dataset: Dataset, stream) -> None:
    """Inverse of parse_libsvm up to shortest round-trippable float formatting."""
    for ex in dataset.examples:
        parts = ["+1" if ex.label == 1 else "-1"]
        for i, v in zip(ex.features.indices.tolist(), ex.features.values.tolist()):
            parts.append("%d:%s" % (i, _format_value(v)))
        stream.write(" ".join(parts))
        stream.write("\n")


def read_libsvm(path) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_libsvm(fh, provenance=str(path))


def save_libsvm(dataset: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_libsvm(dataset, fh)


def split(dataset: Dataset, fractions: tuple[float, float, float], seed: int):
    """Shuffle once by seed, then cut into contiguous train/validation/test parts."""
    if len(fractions) != 3 or any(f < 0 for f in fractions):
        raise ValueError("fractions must be three nonnegative numbers")
    if sum(fractions) > 1.0 + 1e-9:
        raise ValueError("fractions must sum to at most 1")
    m = len(dataset)
    order = np.random.default_rng(seed).permutation(m)
    bounds = [int(round(sum(fractions[: i + 1]) * m)) for i in range(3)]
    parts = []
    start = 0
    for name, stop in zip(("train", "validation", "test"), bounds):
        idx = order[start:stop]
        parts.append(
            Dataset(
                tuple(dataset.examples[i] for i in idx),
                dataset.dimension,
                "%s[%s seed=%d]" % (dataset.provenance, name, seed),
            )
        )
        start = stop
    return tuple(parts)


def synthesize(m: int, dimension: int, margin: float = 1.0, label_noise: float = 0.0,
               seed: int = 0, density: float = 0.5):
    """Linearly separable-by-construction synthetic data.

    Draws unit-norm sparse feature vectors, labels them by the sign of a
    planted direction, and scales the returned planted predictor so every
    example satisfies |planted . x| >= margin.  With label_noise = 0 the
    planted predictor therefore has empirical smoothed-hinge loss exactly 0
    (margins above 1); each label is then flipped with probability
    label_noise.  Keeping ||x|| = 1 pins the smoothness surrogate
    max ||x||^2 at 1 regardless of the margin.
    """
    if m < 1 or dimension < 1:
        raise ValueError("m and dimension must be positive")
    if not 0.0 <= label_noise <= 1.0:
        raise ValueError("label_noise must be in [0, 1]")
    if margin <= 0:
        raise ValueError("margin must be positive")
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(dimension)
    direction /= np.linalg.norm(direction)
    # raw |x . direction| below this is resampled; bounds the planted scale
    floor = 0.2
    k = max(1, min(dimension, int(round(density * dimension))))
    examples = []
    for _ in range(m):
        while True:
            if k == dimension:
                idx = np.arange(dimension, dtype=np.int64)
            else:
                idx = np.sort(rng.choice(dimension, size=k, replace=False)).astype(np.int64)
            vals = rng.standard_normal(k)
            nv = np.linalg.norm(vals)
            if nv == 0.0:
                continue
            vals /= nv
            raw = float(np.dot(vals, direction[idx]))
            if abs(raw) > floor:
                break
        label = 1 if raw > 0 else -1
        if label_noise > 0 and rng.random() < label_noise:
            label = -label
        examples.append(Example(SparseVector(idx + 1, vals, dimension), label))
    planted = DenseVector((margin / floor) * direction)
    provenance = "synthesize(m=%d,d=%d,margin=%g,noise=%g,seed=%d)" % (
        m, dimension, margin, label_noise, seed)
    return Dataset(tuple(examples), dimension, provenance), planted


def censor(dataset: Dataset, predictor) -> Dataset:
    """Keep only examples with y * (predictor . x) >= 1.

    The threshold is 1, not 0: every kept example has zero smoothed-hinge
    loss at the predictor, so the censored dataset has empirical loss
    exactly 0 there.  Order is preserved.
    """
    w = as_dense_array(predictor)
    kept = []
    for ex in dataset.examples:
        s = 0.0
        for i, v in zip(ex.features.indices.tolist(), ex.features.values.tolist()):
            s += v * float(w[i - 1])
        if ex.label * s >= 1.0:
            kept.append(ex)
    if not kept:
        raise ValueError(
            "censoring removed every example; the predictor separates nothing at margin 1"
        )
    return Dataset(tuple(kept), dataset.dimension, dataset.provenance + "[censored]")
