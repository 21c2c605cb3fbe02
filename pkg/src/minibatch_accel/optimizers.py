"""The four training loops over a loss model, a geometry, and a schedule.

All four consume the sample strictly in order: iteration i uses examples
b(i-1)+1 .. bi, and a run consumes exactly n*b examples.  Any shuffling is
the caller's job, once, before the run.  The averaged-iterate methods
(sgd, smd) start at the potential's argmin and return the uniform average
of the first n iterates; the accelerated methods (ag, amd) maintain the
md/aggregate pair and return the final aggregate.

With the Euclidean geometry the mirror variants reduce exactly to the
plain ones: the potential gradient and its conjugate are both the
identity, so smd reproduces sgd and amd reproduces ag bit for bit.

The loop is strictly sequential across iterations; inside one iteration
the mini-batch reduction follows the kernel contract (fixed pairwise tree
when ``deterministic_reduction`` is set, unordered otherwise).  With
deterministic reduction the trace's elapsed-time column is recorded as 0.0
so traces are bit-identical run to run.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kernels
from .dataio import Dataset
from .geometry import MirrorMap
from .losses import LossModel
from .schedules import AdmissibilityReport, Schedule, check_admissibility, schedule_terms
from .vectors import DenseVector

__all__ = [
    "DivergenceError",
    "RunConfig",
    "TraceRow",
    "RunTrace",
    "RunResult",
    "run_sgd",
    "run_ag",
    "run_smd",
    "run_amd",
]

LOSS_CEILING = 1e12  # a batch loss beyond this aborts the run


class DivergenceError(RuntimeError):
    """A batch loss went non-finite or past the ceiling; step size too large."""


@dataclass(frozen=True)
class RunConfig:
    batch_size: int
    iterations: int
    seed: int = 0
    projection_enabled: bool = True
    deterministic_reduction: bool = True
    trace_every: int = 1

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if self.trace_every < 1:
            raise ValueError("trace_every must be positive")


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    train_batch_loss: float
    holdout_loss: Optional[float]
    iterate_norm: float
    elapsed_seconds: float


@dataclass
class RunTrace:
    rows: list[TraceRow] = field(default_factory=list)

    def append(self, row: TraceRow) -> None:
        if self.rows and row.iteration <= self.rows[-1].iteration:
            raise ValueError("trace iterations must be strictly increasing")
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)


@dataclass(frozen=True)
class RunResult:
    weights: DenseVector
    trace: RunTrace
    admissibility: Optional[AdmissibilityReport] = None


IterateHook = Callable[[int, np.ndarray, Optional[np.ndarray]], None]


def _prepare(dataset: Dataset, geometry: MirrorMap, config: RunConfig):
    needed = config.iterations * config.batch_size
    if needed > len(dataset):
        raise ValueError(
            "insufficient data: need n*b = %d examples, have %d" % (needed, len(dataset))
        )
    if 0 < len(dataset) - needed < config.batch_size:
        warnings.warn(
            "%d trailing examples beyond n*b are dropped" % (len(dataset) - needed),
            stacklevel=3,
        )
    if geometry.dimension != dataset.dimension:
        raise ValueError("geometry dimension %d != dataset dimension %d"
                         % (geometry.dimension, dataset.dimension))
    return dataset.packed


def _check_batch_loss(value: float) -> None:
    if not math.isfinite(value) or value > LOSS_CEILING:
        raise DivergenceError("batch loss %r exceeds the divergence guard" % (value,))


def _holdout_loss(model: LossModel, w: np.ndarray, holdout: Optional[Dataset]):
    if holdout is None or len(holdout) == 0:
        return None
    packed = holdout.packed
    return float(kernels.mean_loss(
        packed.indptr, packed.indices, packed.values, packed.labels,
        w, model.kind_code, 0, len(holdout),
    ))


def _averaged_loop(model: LossModel, geometry: MirrorMap, schedule: Schedule,
                   dataset: Dataset, config: RunConfig,
                   holdout: Optional[Dataset], iterate_hook: Optional[IterateHook],
                   mirror: bool) -> RunResult:
    packed = _prepare(dataset, geometry, config)
    d = dataset.dimension
    b, n = config.batch_size, config.iterations
    det = config.deterministic_reduction
    w = geometry.center()
    running_sum = np.zeros(d)
    grad = np.zeros(d)
    trace = RunTrace()
    t0 = time.perf_counter()
    for i in range(1, n + 1):
        value = kernels.batch_value_grad(
            packed.indptr, packed.indices, packed.values, packed.labels,
            w, (i - 1) * b, i * b, model.kind_code, det, grad,
        )
        _check_batch_loss(value)
        running_sum += w
        step, _ = schedule_terms(schedule, i)
        if mirror:
            moved = geometry.grad_conjugate(geometry.grad_potential(w) - step * grad)
        else:
            moved = w - step * grad
        w = geometry.project(moved) if config.projection_enabled else moved
        if iterate_hook is not None:
            iterate_hook(i, w, None)
        if i % config.trace_every == 0 or i == n:
            elapsed = 0.0 if det else time.perf_counter() - t0
            trace.append(TraceRow(
                iteration=i,
                train_batch_loss=float(value),
                holdout_loss=_holdout_loss(model, running_sum / i, holdout),
                iterate_norm=float(np.linalg.norm(w)),
                elapsed_seconds=elapsed,
            ))
    return RunResult(DenseVector(running_sum / n), trace)


def _accelerated_loop(model: LossModel, geometry: MirrorMap, schedule: Schedule,
                      dataset: Dataset, config: RunConfig,
                      holdout: Optional[Dataset], iterate_hook: Optional[IterateHook],
                      mirror: bool) -> RunResult:
    packed = _prepare(dataset, geometry, config)
    b, n = config.batch_size, config.iterations
    det = config.deterministic_reduction
    w = geometry.center()
    w_ag = w.copy()
    grad = np.zeros(dataset.dimension)
    report = check_admissibility(schedule, model.smoothness, n)
    trace = RunTrace()
    t0 = time.perf_counter()
    for i in range(1, n + 1):
        step, beta = schedule_terms(schedule, i)
        mix = 1.0 / beta
        w_md = mix * w + (1.0 - mix) * w_ag
        value = kernels.batch_value_grad(
            packed.indptr, packed.indices, packed.values, packed.labels,
            w_md, (i - 1) * b, i * b, model.kind_code, det, grad,
        )
        _check_batch_loss(value)
        if mirror:
            moved = geometry.grad_conjugate(geometry.grad_potential(w_md) - step * grad)
        else:
            moved = w_md - step * grad
        w = geometry.project(moved) if config.projection_enabled else moved
        w_ag = mix * w + (1.0 - mix) * w_ag
        if iterate_hook is not None:
            iterate_hook(i, w, w_ag)
        if i % config.trace_every == 0 or i == n:
            elapsed = 0.0 if det else time.perf_counter() - t0
            trace.append(TraceRow(
                iteration=i,
                train_batch_loss=float(value),
                holdout_loss=_holdout_loss(model, w_ag, holdout),
                iterate_norm=float(np.linalg.norm(w)),
                elapsed_seconds=elapsed,
            ))
    return RunResult(DenseVector(w_ag), trace, report)


def run_sgd(model: LossModel, geometry: MirrorMap, schedule: Schedule,
            dataset: Dataset, config: RunConfig,
            holdout: Optional[Dataset] = None,
            iterate_hook: Optional[IterateHook] = None) -> RunResult:
    """Mini-batched gradient descent; returns the average of iterates 1..n."""
    if schedule.kind != "sgd":
        raise ValueError("run_sgd needs an sgd schedule, got %r" % (schedule.kind,))
    if geometry.kind != "euclidean":
        raise ValueError("run_sgd is the Euclidean specialization; use run_smd")
    return _averaged_loop(model, geometry, schedule, dataset, config,
                          holdout, iterate_hook, mirror=False)


def run_smd(model: LossModel, geometry: MirrorMap, schedule: Schedule,
            dataset: Dataset, config: RunConfig,
            holdout: Optional[Dataset] = None,
            iterate_hook: Optional[IterateHook] = None) -> RunResult:
    """Mirror-descent generalization of run_sgd; starts at argmin of the potential."""
    if schedule.kind != "smd":
        raise ValueError("run_smd needs an smd schedule, got %r" % (schedule.kind,))
    return _averaged_loop(model, geometry, schedule, dataset, config,
                          holdout, iterate_hook, mirror=True)


def run_ag(model: LossModel, geometry: MirrorMap, schedule: Schedule,
           dataset: Dataset, config: RunConfig,
           holdout: Optional[Dataset] = None,
           iterate_hook: Optional[IterateHook] = None) -> RunResult:
    """Accelerated method; one gradient per iteration, taken at the md point.

    Returns the final aggregate iterate.  The admissibility report for the
    schedule is attached to the result.
    """
    if schedule.kind != "ag":
        raise ValueError("run_ag needs an ag schedule, got %r" % (schedule.kind,))
    if geometry.kind != "euclidean":
        raise ValueError("run_ag is the Euclidean specialization; use run_amd")
    return _accelerated_loop(model, geometry, schedule, dataset, config,
                             holdout, iterate_hook, mirror=False)


def run_amd(model: LossModel, geometry: MirrorMap, schedule: Schedule,
            dataset: Dataset, config: RunConfig,
            holdout: Optional[Dataset] = None,
            iterate_hook: Optional[IterateHook] = None) -> RunResult:
    """Mirror-descent generalization of run_ag; starts at argmin of the potential."""
    if schedule.kind != "amd":
        raise ValueError("run_amd needs an amd schedule, got %r" % (schedule.kind,))
    return _accelerated_loop(model, geometry, schedule, dataset, config,
                             holdout, iterate_hook, mirror=True)


RUNNERS = {"sgd": run_sgd, "ag": run_ag, "smd": run_smd, "amd": run_amd}
