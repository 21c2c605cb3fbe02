"""Mirror maps: strongly convex potentials, conjugate gradients, projections.

Two geometries are built in.  The Euclidean map uses the potential
0.5 ||w||^2 over a ball of a given radius; its gradient and conjugate
gradient are both the identity, so mirror updates collapse to plain
gradient steps.  The entropy map lives on the probability simplex with the
l1 norm; its potential is the KL divergence to the uniform distribution,
sum_j w_j ln(w_j d), which is nonnegative, 1-strongly convex w.r.t. l1,
and has the closed-form conjugate gradient softmax(theta).

Divergences satisfy bregman(w, w') >= 0.5 ||w - w'||^2 in the paired norm,
with equality structure inherited from 1-strong convexity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .vectors import as_dense_array

__all__ = ["MirrorMap"]


@dataclass(frozen=True)
class MirrorMap:
    """A potential, its geometry constants, and the feasible-set projection.

    ``radius`` is the norm radius of the feasible set (its paired norm);
    ``ball_constant`` is sqrt(2 sup {potential(w) : ||w|| <= 1}), which is
    1 for the Euclidean map and sqrt(2 ln d) for the entropy map.
    """

    kind: str
    dimension: int
    radius: float
    ball_constant: float

    @classmethod
    def euclidean(cls, dimension: int, radius: float = 1.0) -> "MirrorMap":
        if dimension < 1:
            raise ValueError("dimension must be positive")
        if not (radius > 0 and math.isfinite(radius)):
            raise ValueError("radius must be positive and finite")
        return cls("euclidean", dimension, radius, 1.0)

    @classmethod
    def entropy(cls, dimension: int) -> "MirrorMap":
        if dimension < 2:
            raise ValueError("the entropy map needs dimension >= 2")
        return cls("entropy", dimension, 1.0, math.sqrt(2.0 * math.log(dimension)))

    # -- potential and its gradients -------------------------------------

    def potential(self, w) -> float:
        arr = as_dense_array(w)
        self._check_dim(arr)
        if self.kind == "euclidean":
            return 0.5 * float(np.dot(arr, arr))
        if np.any(arr < 0.0):
            raise ValueError("entropy potential needs nonnegative coordinates")
        mask = arr > 0.0  # 0 ln 0 = 0
        return float(np.sum(arr[mask] * np.log(arr[mask] * self.dimension)))

    def _check_dim(self, arr: np.ndarray) -> None:
        if arr.shape[0] != self.dimension:
            raise ValueError(
                "dimension mismatch: %d vs %d" % (arr.shape[0], self.dimension)
            )

    def grad_potential(self, w) -> np.ndarray:
        arr = as_dense_array(w)
        self._check_dim(arr)
        if self.kind == "euclidean":
            return arr
        if np.any(arr <= 0.0):
            raise ValueError("entropy gradient needs strictly positive coordinates")
        return np.log(arr * self.dimension) + 1.0

    def grad_conjugate(self, theta) -> np.ndarray:
        arr = as_dense_array(theta)
        self._check_dim(arr)
        if self.kind == "euclidean":
            return arr
        shifted = arr - np.max(arr)  # overflow guard; cancels in normalization
        e = np.exp(shifted)
        return e / np.sum(e)

    def bregman(self, w, w_ref) -> float:
        """potential(w) - potential(w_ref) - <grad_potential(w_ref), w - w_ref>."""
        a = as_dense_array(w)
        b = as_dense_array(w_ref)
        self._check_dim(a)
        self._check_dim(b)
        if self.kind == "euclidean":
            diff = a - b
            return 0.5 * float(np.dot(diff, diff))
        if np.any(a < 0.0) or np.any(b <= 0.0):
            raise ValueError("entropy divergence needs w >= 0 and w_ref > 0")
        mask = a > 0.0
        return float(np.sum(a[mask] * np.log(a[mask] / b[mask])) + np.sum(b) - np.sum(a))

    def project(self, w) -> np.ndarray:
        """Nearest feasible point in the map's own divergence."""
        arr = as_dense_array(w)
        self._check_dim(arr)
        if self.kind == "euclidean":
            nrm = math.sqrt(float(np.dot(arr, arr)))
            if nrm <= self.radius:
                return arr
            return arr * (self.radius / nrm)
        if np.any(arr < 0.0):
            raise ValueError("KL projection needs nonnegative coordinates")
        total = float(np.sum(arr))
        if total <= 0.0:
            raise ValueError("KL projection of the zero vector is undefined")
        return arr / total

    def center(self) -> np.ndarray:
        """argmin of the potential: the origin, or the uniform distribution."""
        if self.kind == "euclidean":
            return np.zeros(self.dimension)
        return np.full(self.dimension, 1.0 / self.dimension)

    def norm(self, w) -> float:
        """The map's paired norm: l2 for euclidean, l1 for entropy."""
        arr = as_dense_array(w)
        if self.kind == "euclidean":
            return float(np.linalg.norm(arr))
        return float(np.sum(np.abs(arr)))

    def contains(self, w, tol: float = 1e-9) -> bool:
        arr = as_dense_array(w)
        if self.kind == "euclidean":
            return float(np.linalg.norm(arr)) <= self.radius + tol
        return bool(np.all(arr >= -tol) and abs(float(np.sum(arr)) - 1.0) <= tol)
