"""Numerical evaluation of the convergence guarantees and speedup regimes.

``evaluate_bounds`` computes the four guarantee right-hand sides literally,
with their published constants.  ``classify_regime`` reproduces the
parallel-speedup tables obtained by inverting those bounds at a target
suboptimality (all regime outputs are up to constants).  The serial
analysis gives the largest mini-batch sizes that keep the data-access
count within a constant factor: L*/eps for the plain method and the larger
L*/eps^(3/2) for the accelerated one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .schedules import ProblemParams, guarantee_warnings

__all__ = [
    "BoundReport",
    "RegimeReport",
    "SerialBatchLimits",
    "evaluate_bounds",
    "ag_bound_radius_form",
    "classify_regime",
    "max_serial_batch",
]

SGD_NO_SPEEDUP_NOTE = (
    "no non-constant parallel speedup from mini-batching: the linear-speedup "
    "boundary sqrt(L* m) is below every usable batch size"
)

AG_SQRT_SPEEDUP_NOTE = (
    "at least a sqrt(b) parallel speedup, available up to batch size m^(2/3)"
)


@dataclass(frozen=True)
class BoundReport:
    """Right-hand sides of the four guarantees, plus precondition flags."""

    sgd_bound: float
    ag_bound: float
    smd_bound: float
    amd_bound: float
    preconditions_met: dict[str, bool]
    warnings: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "sgd": self.sgd_bound,
            "ag": self.ag_bound,
            "smd": self.smd_bound,
            "amd": self.amd_bound,
            "preconditions_met": dict(self.preconditions_met),
            "warnings": list(self.warnings),
        }


def _sgd_bound(h, wsq, lstar, b, n) -> float:
    return (math.sqrt(64.0 * h * wsq * lstar / (b * n))
            + (4.0 * lstar + 4.0 * h * wsq) / n
            + 8.0 * h * wsq / (b * n))


def _ag_bound(h, wsq, lstar, d, b, n) -> float:
    return (117.0 * math.sqrt(h * wsq * lstar / (b * n))
            + 367.0 * h * wsq ** (2.0 / 3.0) * d ** (2.0 / 3.0) / (math.sqrt(b) * n)
            + 546.0 * h * d * d * math.sqrt(math.log(n)) / (b * n)
            + 5.0 * h * wsq / (n * n))


def ag_bound_radius_form(params: ProblemParams) -> float:
    """The radius-only display of the accelerated bound (comparator norm <= D)."""
    h, b, n = params.smoothness, params.batch_size, params.iterations
    d = params.radius
    return (117.0 * math.sqrt(h * d * d * params.best_loss / (b * n))
            + 367.0 * h * d * d / (math.sqrt(b) * n)
            + 546.0 * h * d * d * math.sqrt(math.log(n)) / (b * n)
            + 5.0 * h * d * d / (n * n))


def _smd_bound(h, k2, r, lstar, b, n) -> float:
    return (math.sqrt(128.0 * h * k2 * r * lstar / (b * n))
            + (4.0 * lstar + 8.0 * h * r) / n
            + 16.0 * h * k2 * r / (b * n))


def _amd_bound(h, k2, r, lstar, d, b, n) -> float:
    if n < 2:
        return math.inf
    return (164.0 * math.sqrt(h * k2 * r * lstar / (b * (n - 1)))
            + 580.0 * h * k2 * r ** (2.0 / 3.0) * d ** (2.0 / 3.0) / (math.sqrt(b) * (n - 1))
            + 545.0 * h * k2 * d * d * math.sqrt(math.log(n)) / (b * (n - 1))
            + 8.0 * h * r / ((n - 1) * (n - 1)))


def evaluate_bounds(params: ProblemParams) -> BoundReport:
    """Literal evaluation of each guarantee's right-hand side."""
    h = params.smoothness
    b = params.batch_size
    n = params.iterations
    lstar = params.best_loss
    wsq = params.comparator_sq_norm
    d = params.radius
    k2 = params.ball_constant ** 2
    r = params.r_star
    warns = list(guarantee_warnings(params))
    met = {
        "sgd": True,
        "smd": True,
        "ag": n >= 783,
        "amd": n >= max(783.0 * k2, 87.0 * k2 * lstar / (h * d * d)),
    }
    if not met["ag"]:
        warns.insert(0, "accelerated Euclidean guarantee needs n >= 783, got n=%d" % n)
    return BoundReport(
        sgd_bound=_sgd_bound(h, wsq, lstar, b, n),
        ag_bound=_ag_bound(h, wsq, lstar, d, b, n),
        smd_bound=_smd_bound(h, k2, r, lstar, b, n),
        amd_bound=_amd_bound(h, k2, r, lstar, d, b, n),
        preconditions_met=met,
        warnings=tuple(warns),
    )


@dataclass(frozen=True)
class RegimeReport:
    """Which row of the speedup table a configuration lands in."""

    algorithm: str
    regime_label: str
    predicted_n: float
    max_serial_b: float
    note: Optional[str] = None

    def as_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "regime": self.regime_label,
            "predicted_n": self.predicted_n,
            "max_serial_b": self.max_serial_b,
            "note": self.note,
        }


class SerialBatchLimits(NamedTuple):
    sgd: float
    ag: float
    note: Optional[str]


def max_serial_batch(best_loss: float, epsilon: float) -> SerialBatchLimits:
    """Largest batch sizes that keep serial runtime within a constant factor."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if best_loss < 0:
        raise ValueError("best_loss must be nonnegative")
    note = None
    if best_loss == 0.0:
        note = "serial analysis degenerates at L* = 0: both limits collapse to 0"
    return SerialBatchLimits(best_loss / epsilon, best_loss / epsilon ** 1.5, note)


def classify_regime(algorithm: str, batch_size: float, sample_size: float,
                    best_loss: float, epsilon: float) -> RegimeReport:
    """Locate (b, m) in the parallel-runtime tables; outputs are up to constants.

    Boundary ties go to the larger-b row, and epsilon = L*^2 resolves to
    the epsilon >= L*^2 table.
    """
    if algorithm not in ("sgd", "ag"):
        raise ValueError("algorithm must be 'sgd' or 'ag'")
    if batch_size < 1 or sample_size <= 0 or epsilon <= 0 or best_loss < 0:
        raise ValueError("need b >= 1, m > 0, epsilon > 0, L* >= 0")
    b, m, lstar, eps = batch_size, sample_size, best_loss, epsilon
    serial = max_serial_batch(lstar, eps)
    note = None
    if algorithm == "sgd":
        boundary = math.sqrt(lstar * m)
        if b < boundary:
            label, n = "L*/(eps^2 b)", lstar / (eps * eps * b)
        else:
            label, n = "1/eps", 1.0 / eps
            if boundary < 1.0:
                note = SGD_NO_SPEEDUP_NOTE
        return RegimeReport("sgd", label, n, serial.sgd, note)
    if eps < lstar * lstar:
        boundary = lstar ** 0.25 * m ** 0.75
        if b < boundary:
            label, n = "L*/(eps^2 b)", lstar / (eps * eps * b)
        else:
            label, n = "1/sqrt(eps)", 1.0 / math.sqrt(eps)
    else:
        if b < lstar * m:
            label, n = "L*/(eps^2 b)", lstar / (eps * eps * b)
        elif b < m ** (2.0 / 3.0):
            label, n = "1/(eps sqrt(b))", 1.0 / (eps * math.sqrt(b))
            note = AG_SQRT_SPEEDUP_NOTE
        else:
            label, n = "1/sqrt(eps)", 1.0 / math.sqrt(eps)
    return RegimeReport("ag", label, n, serial.ag, note)
