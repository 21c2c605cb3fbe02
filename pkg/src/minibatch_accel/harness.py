"""Experiment orchestration: runs, sweeps, censoring, bound reports, checks.

Every CSV this module emits has a fixed header and column order and can be
read back by the functions here.  Sweeps hold the training-data budget
m = n*b fixed while varying the batch size or the step-growth exponent;
per-seed rows are accompanied by a summary averaged over seeds.  Cells of
a sweep are independent and may run on a thread pool; rows are merged in
canonical cell order regardless of completion order, so output bytes do
not depend on the worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .analysis import classify_regime, evaluate_bounds, max_serial_batch
from .dataio import Dataset, censor, read_libsvm, save_libsvm, split, synthesize
from .geometry import MirrorMap
from .losses import LossModel, dataset_loss, estimate_smoothness, self_bound_residual
from .optimizers import DivergenceError, RunConfig, RunTrace, RUNNERS
from .schedules import (
    ProblemParams,
    Schedule,
    accel_exponent,
    accel_exponent_figure,
    accel_base_step,
    check_admissibility,
    grid_select,
    sgd_step_size,
)
from .vectors import DenseVector

__all__ = [
    "GRID_MULTIPLIERS",
    "ValidationError",
    "SynthSpec",
    "ExperimentSpec",
    "ResultRow",
    "ResultTable",
    "cmd_train",
    "cmd_sweep_b",
    "cmd_sweep_p",
    "cmd_censor",
    "cmd_bounds",
    "cmd_verify",
    "cmd_convert",
    "read_result_csv",
    "read_summary_csv",
    "read_trace_csv",
]

GRID_MULTIPLIERS = (1 / 16, 1 / 8, 1 / 4, 1 / 2, 1.0, 2.0, 4.0, 8.0, 16.0)

RESULT_HEADER = ("algorithm", "b", "p", "seed", "final_train_loss",
                 "test_loss", "test_misclassification", "wall_seconds")
SUMMARY_HEADER = ("algorithm", "b", "p", "n_seeds", "final_train_loss",
                  "test_loss", "test_misclassification", "wall_seconds")
SWEEP_P_SUMMARY_HEADER = SUMMARY_HEADER + ("theoretical_p", "figure_p")
TRACE_HEADER = ("iteration", "train_batch_loss", "holdout_loss",
                "iterate_norm", "elapsed_seconds")


class ValidationError(ValueError):
    """Bad experiment specification or flags; maps to exit code 1."""


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


@dataclass(frozen=True)
class SynthSpec:
    m: int
    dimension: int
    margin: float
    label_noise: float


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything one training run or sweep needs."""

    algorithms: tuple[str, ...]
    data_path: Optional[str] = None
    synth: Optional[SynthSpec] = None
    data_seed: int = 0
    batch_sizes: tuple[int, ...] = (1,)
    p_values: Optional[tuple[float, ...]] = None
    fixed_m: Optional[int] = None
    seeds: tuple[int, ...] = (0,)
    step_mode: str = "theoretical"
    grid_multipliers: tuple[float, ...] = GRID_MULTIPLIERS
    projection_enabled: bool = True
    deterministic: bool = False
    trace_every: int = 1
    threads: int = 1
    best_loss: float = 0.0
    comparator_norm: float = 1.0
    radius: Optional[float] = None
    fractions: tuple[float, float, float] = (0.5, 0.25, 0.25)
    out_path: Optional[str] = None

    def __post_init__(self):
        for algo in self.algorithms:
            if algo not in RUNNERS:
                raise ValidationError("unknown algorithm %r" % (algo,))
        if not self.algorithms:
            raise ValidationError("need at least one algorithm")
        if (self.data_path is None) == (self.synth is None):
            raise ValidationError("exactly one of data_path or synth must be given")
        if not self.seeds:
            raise ValidationError("need at least one seed")
        if any(b < 1 for b in self.batch_sizes):
            raise ValidationError("batch sizes must be positive")
        if self.fixed_m is not None:
            for b in self.batch_sizes:
                if self.fixed_m % b != 0:
                    raise ValidationError(
                        "batch size %d does not divide fixed m=%d" % (b, self.fixed_m))
        if self.p_values is not None:
            if any(not 0.0 <= p <= 1.0 for p in self.p_values):
                raise ValidationError("p values must lie in [0, 1]")
        if self.step_mode not in ("theoretical", "grid"):
            raise ValidationError("step_mode must be 'theoretical' or 'grid'")
        if self.threads < 1:
            raise ValidationError("threads must be positive")
        if self.comparator_norm <= 0:
            raise ValidationError("comparator norm must be positive")

    @property
    def effective_radius(self) -> float:
        return self.radius if self.radius is not None else self.comparator_norm


@dataclass(frozen=True)
class ResultRow:
    algorithm: str
    b: int
    p: Optional[float]
    seed: int
    final_train_loss: float
    test_loss: float
    test_misclassification: float
    wall_seconds: float


@dataclass
class ResultTable:
    rows: list[ResultRow] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(RESULT_HEADER)
        for r in self.rows:
            writer.writerow([
                r.algorithm, r.b, _fmt(r.p), r.seed, _fmt(r.final_train_loss),
                _fmt(r.test_loss), _fmt(r.test_misclassification), _fmt(r.wall_seconds),
            ])
        return buf.getvalue()

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())

    def summary_rows(self):
        """Mean over seeds per (algorithm, b, p) cell, in first-seen order."""
        groups: dict[tuple, list[ResultRow]] = {}
        for r in self.rows:
            groups.setdefault((r.algorithm, r.b, r.p), []).append(r)
        out = []
        for (algo, b, p), rows in groups.items():
            out.append({
                "algorithm": algo,
                "b": b,
                "p": p,
                "n_seeds": len(rows),
                "final_train_loss": sum(r.final_train_loss for r in rows) / len(rows),
                "test_loss": sum(r.test_loss for r in rows) / len(rows),
                "test_misclassification":
                    sum(r.test_misclassification for r in rows) / len(rows),
                "wall_seconds": sum(r.wall_seconds for r in rows) / len(rows),
            })
        return out

    def summary_csv(self, extra_columns=None) -> str:
        header = SWEEP_P_SUMMARY_HEADER if extra_columns else SUMMARY_HEADER
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for s in self.summary_rows():
            row = [s["algorithm"], s["b"], _fmt(s["p"]), s["n_seeds"],
                   _fmt(s["final_train_loss"]), _fmt(s["test_loss"]),
                   _fmt(s["test_misclassification"]), _fmt(s["wall_seconds"])]
            if extra_columns:
                theo, fig = extra_columns[(s["algorithm"], s["b"])]
                row += [_fmt(theo), _fmt(fig)]
            writer.writerow(row)
        return buf.getvalue()


def read_result_csv(path: str) -> ResultTable:
    table = ResultTable()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != RESULT_HEADER:
            raise ValidationError("unexpected result header %r" % (header,))
        for rec in reader:
            table.rows.append(ResultRow(
                algorithm=rec[0],
                b=int(rec[1]),
                p=float(rec[2]) if rec[2] else None,
                seed=int(rec[3]),
                final_train_loss=float(rec[4]),
                test_loss=float(rec[5]),
                test_misclassification=float(rec[6]),
                wall_seconds=float(rec[7]),
            ))
    return table


def trace_csv(trace: RunTrace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for row in trace:
        writer.writerow([
            row.iteration, _fmt(row.train_batch_loss), _fmt(row.holdout_loss),
            _fmt(row.iterate_norm), _fmt(row.elapsed_seconds),
        ])
    return buf.getvalue()


def read_trace_csv(path: str) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != TRACE_HEADER:
            raise ValidationError("unexpected trace header %r" % (header,))
        return [
            {
                "iteration": int(rec[0]),
                "train_batch_loss": float(rec[1]),
                "holdout_loss": float(rec[2]) if rec[2] else None,
                "iterate_norm": float(rec[3]),
                "elapsed_seconds": float(rec[4]),
            }
            for rec in reader
        ]


def read_summary_csv(path: str) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header not in (SUMMARY_HEADER, SWEEP_P_SUMMARY_HEADER):
            raise ValidationError("unexpected summary header %r" % (header,))
        out = []
        for rec in reader:
            row = {
                "algorithm": rec[0],
                "b": int(rec[1]),
                "p": float(rec[2]) if rec[2] else None,
                "n_seeds": int(rec[3]),
                "final_train_loss": float(rec[4]),
                "test_loss": float(rec[5]),
                "test_misclassification": float(rec[6]),
                "wall_seconds": float(rec[7]),
            }
            if header == SWEEP_P_SUMMARY_HEADER:
                row["theoretical_p"] = float(rec[8])
                row["figure_p"] = float(rec[9])
            out.append(row)
        return out


# -- dataset acquisition ---------------------------------------------------

def load_experiment_dataset(spec: ExperimentSpec) -> Dataset:
    if spec.data_path is not None:
        return read_libsvm(spec.data_path)
    s = spec.synth
    dataset, _ = synthesize(s.m, s.dimension, s.margin, s.label_noise, seed=spec.data_seed)
    return dataset


def _misclassified(w: np.ndarray, dataset: Dataset) -> float:
    packed = dataset.packed
    return float(kernels.misclassified_fraction(
        packed.indptr, packed.indices, packed.values, packed.labels, w))


# -- one sweep cell ---------------------------------------------------------

def _theoretical_schedule(algo: str, params: ProblemParams, p: Optional[float]) -> Schedule:
    if algo == "sgd":
        return Schedule("sgd", eta=sgd_step_size(params))
    if algo == "smd":
        return Schedule("smd", eta=sgd_step_size(params, general=True))
    if p is None:
        p = accel_exponent(params.batch_size, params.iterations)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # guarantee-precondition warnings are per-run noise here
        gamma = accel_base_step(params, p)
    return Schedule(algo, gamma=gamma, power=p)


def _run_cell(spec: ExperimentSpec, dataset: Dataset, algo: str, b: int,
              p_request: Optional[float], seed: int,
              figure_exponent: bool = False) -> tuple[ResultRow, RunTrace]:
    train, validation, test = split(dataset, spec.fractions, seed)
    if spec.fixed_m is not None:
        if spec.fixed_m > len(train):
            raise ValidationError(
                "fixed m=%d exceeds the train split (%d examples)"
                % (spec.fixed_m, len(train)))
        train_used = train.take(spec.fixed_m)
    else:
        m_used = (len(train) // b) * b
        if m_used == 0:
            raise ValidationError("train split smaller than one batch")
        if m_used < len(train):
            warnings.warn("dropping %d train examples not filling a batch"
                          % (len(train) - m_used), stacklevel=2)
        train_used = train.take(m_used)
    n = len(train_used) // b
    smoothness = estimate_smoothness("smoothed_hinge", train_used)
    if smoothness <= 0.0:
        raise ValidationError("training slice has no nonzero features")
    model = LossModel("smoothed_hinge", smoothness)
    geometry = MirrorMap.euclidean(dataset.dimension, spec.effective_radius)
    params = ProblemParams(
        smoothness=model.smoothness, batch_size=b, iterations=n,
        best_loss=spec.best_loss, comparator_sq_norm=spec.comparator_norm ** 2,
        radius=spec.effective_radius,
    )
    if p_request is not None:
        p = p_request
    elif algo in ("ag", "amd"):
        p = (accel_exponent_figure(b, n) if figure_exponent else accel_exponent(b, n)) \
            if n >= 3 else 1.0
    else:
        p = None
    schedule = _theoretical_schedule(algo, params, p)
    config = RunConfig(
        batch_size=b, iterations=n, seed=seed,
        projection_enabled=spec.projection_enabled,
        deterministic_reduction=spec.deterministic,
        trace_every=spec.trace_every,
    )
    runner = RUNNERS[algo]
    if spec.step_mode == "grid":
        if len(validation) == 0:
            raise ValidationError("grid step selection needs a nonempty validation split")

        def score(candidate: Schedule) -> float:
            try:
                result = runner(model, geometry, candidate, train_used, config)
            except DivergenceError:
                return math.inf
            value = dataset_loss(model, result.weights.array, validation)
            return value if math.isfinite(value) else math.inf

        schedule = grid_select(schedule, spec.grid_multipliers, score)
    t0 = time.perf_counter()
    result = runner(model, geometry, schedule, train_used, config)
    wall = 0.0 if spec.deterministic else time.perf_counter() - t0
    w = result.weights.array
    row = ResultRow(
        algorithm=algo,
        b=b,
        p=p if algo in ("ag", "amd") else None,
        seed=seed,
        final_train_loss=dataset_loss(model, w, train_used),
        test_loss=dataset_loss(model, w, test) if len(test) else math.nan,
        test_misclassification=_misclassified(w, test) if len(test) else math.nan,
        wall_seconds=wall,
    )
    return row, result.trace


def _execute_cells(spec: ExperimentSpec, dataset: Dataset, cells,
                   figure_exponent: bool = False):
    """Run cells, possibly on a thread pool; results in canonical cell order."""
    if spec.threads == 1:
        return [_run_cell(spec, dataset, *cell, figure_exponent=figure_exponent)
                for cell in cells]
    with ThreadPoolExecutor(max_workers=spec.threads) as pool:
        futures = [pool.submit(_run_cell, spec, dataset, *cell,
                               figure_exponent=figure_exponent)
                   for cell in cells]
        return [f.result() for f in futures]


# -- subcommands ------------------------------------------------------------

def cmd_train(spec: ExperimentSpec) -> ResultTable:
    """One algorithm at one batch size, one run per seed; writes results + traces."""
    if len(spec.algorithms) != 1 or len(spec.batch_sizes) != 1:
        raise ValidationError("train takes exactly one algorithm and one batch size")
    dataset = load_experiment_dataset(spec)
    algo, b = spec.algorithms[0], spec.batch_sizes[0]
    p = spec.p_values[0] if spec.p_values else None
    cells = [(algo, b, p, seed) for seed in spec.seeds]
    outcome = _execute_cells(spec, dataset, cells)
    table = ResultTable([row for row, _ in outcome])
    if spec.out_path:
        table.write(spec.out_path)
        _write_config(spec)
        for (row, trace) in outcome:
            path = "%s.trace-s%d.csv" % (spec.out_path, row.seed)
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(trace_csv(trace))
    return table


def cmd_sweep_b(spec: ExperimentSpec) -> ResultTable:
    """Batch-size sweep at fixed training budget m = n*b.

    Accelerated cells use the plotting-convention exponent
    log(b) / (2 log(n-1)).  Writes per-seed results and a summary averaged
    over seeds.
    """
    if spec.fixed_m is None:
        raise ValidationError("sweep-b needs a fixed training budget (--m)")
    dataset = load_experiment_dataset(spec)
    cells = [(algo, b, None, seed)
             for algo in spec.algorithms
             for b in spec.batch_sizes
             for seed in spec.seeds]
    outcome = _execute_cells(spec, dataset, cells, figure_exponent=True)
    table = ResultTable([row for row, _ in outcome])
    if spec.out_path:
        table.write(spec.out_path)
        _write_config(spec)
        with open(_summary_path(spec.out_path), "w", encoding="utf-8", newline="") as fh:
            fh.write(table.summary_csv())
    return table


def cmd_sweep_p(spec: ExperimentSpec) -> ResultTable:
    """Exponent sweep for the accelerated methods, base step re-derived per p.

    The summary carries the theoretical exponent and the plotting-convention
    exponent for each batch size so the swept values can be compared against
    them.
    """
    if spec.p_values is None or not spec.p_values:
        raise ValidationError("sweep-p needs a list of p values")
    for algo in spec.algorithms:
        if algo not in ("ag", "amd"):
            raise ValidationError("sweep-p applies to the accelerated methods only")
    if spec.fixed_m is None:
        raise ValidationError("sweep-p needs a fixed training budget (--m)")
    dataset = load_experiment_dataset(spec)
    cells = [(algo, b, p, seed)
             for algo in spec.algorithms
             for b in spec.batch_sizes
             for p in spec.p_values
             for seed in spec.seeds]
    outcome = _execute_cells(spec, dataset, cells)
    table = ResultTable([row for row, _ in outcome])
    marks = {}
    for algo in spec.algorithms:
        for b in spec.batch_sizes:
            n = spec.fixed_m // b
            theo = accel_exponent(b, n) if n >= 3 else 1.0
            fig = accel_exponent_figure(b, n) if n >= 3 else 1.0
            marks[(algo, b)] = (theo, fig)
    if spec.out_path:
        table.write(spec.out_path)
        _write_config(spec)
        with open(_summary_path(spec.out_path), "w", encoding="utf-8", newline="") as fh:
            fh.write(table.summary_csv(extra_columns=marks))
    return table


def _summary_path(path: str) -> str:
    if path.endswith(".csv"):
        return path[:-4] + "_summary.csv"
    return path + "_summary.csv"


def _write_config(spec: ExperimentSpec) -> None:
    """Sidecar JSON with the full spec, for reproducing a results file."""
    if not spec.out_path:
        return
    payload = asdict(spec)
    with open(spec.out_path + ".config.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)


# -- censoring pipeline -----------------------------------------------------

@dataclass(frozen=True)
class CensorSummary:
    total: int
    kept: int
    removed_fraction: float
    predictor_train_loss: float
    post_censor_loss: float
    output_path: Optional[str]
    predictor_path: Optional[str]

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "kept": self.kept,
            "removed_fraction": self.removed_fraction,
            "predictor_train_loss": self.predictor_train_loss,
            "post_censor_loss": self.post_censor_loss,
            "output": self.output_path,
            "predictor": self.predictor_path,
        }


def train_censor_predictor(dataset: Dataset, budget: int = 1024,
                           seed: int = 0) -> tuple[DenseVector, dict]:
    """Fit the accelerated method aggressively enough to expose margins.

    Uses the stability-cap base step 1/(4H) with linearly growing steps
    (power 1), which satisfies the admissibility conditions exactly; the
    guarantee-tuned step is far too conservative to interpolate here.  The
    data is shuffled once by the seed; projection is off so the predictor
    norm can grow.
    """
    if budget < 1:
        raise ValidationError("budget must be positive")
    m = len(dataset)
    order = np.random.default_rng(seed).permutation(m)
    shuffled = dataset.reorder(order, note="[censor-shuffle seed=%d]" % seed)
    b = max(1, m // budget)
    n = m // b
    model = LossModel("smoothed_hinge", estimate_smoothness("smoothed_hinge", dataset))
    geometry = MirrorMap.euclidean(dataset.dimension, radius=1.0)
    schedule = Schedule("ag", gamma=1.0 / (4.0 * model.smoothness), power=1.0)
    config = RunConfig(batch_size=b, iterations=n, seed=seed,
                       projection_enabled=False, deterministic_reduction=True,
                       trace_every=max(1, n))
    result = RUNNERS["ag"](model, geometry, schedule, shuffled, config)
    info = {
        "batch_size": b,
        "iterations": n,
        "gamma": schedule.gamma,
        "power": schedule.power,
        "seed": seed,
        "train_loss": dataset_loss(model, result.weights.array, dataset),
    }
    return result.weights, info


def cmd_censor(input_path: Optional[str], output_path: Optional[str],
               budget: int = 1024, seed: int = 0,
               dataset: Optional[Dataset] = None) -> CensorSummary:
    """Train a predictor, drop its margin violations, write the clean subset."""
    if dataset is None:
        dataset = read_libsvm(input_path)
    predictor, info = train_censor_predictor(dataset, budget=budget, seed=seed)
    kept = censor(dataset, predictor)
    model = LossModel("smoothed_hinge", estimate_smoothness("smoothed_hinge", dataset))
    post = dataset_loss(model, predictor.array, kept)
    predictor_path = None
    if output_path:
        save_libsvm(kept, output_path)
        predictor_path = output_path + ".predictor.json"
        with open(predictor_path, "w", encoding="utf-8") as fh:
            json.dump({"weights": predictor.array.tolist(), **info}, fh)
    return CensorSummary(
        total=len(dataset),
        kept=len(kept),
        removed_fraction=1.0 - len(kept) / len(dataset),
        predictor_train_loss=info["train_loss"],
        post_censor_loss=post,
        output_path=output_path,
        predictor_path=predictor_path,
    )


# -- bound reports ----------------------------------------------------------

def cmd_bounds(params: ProblemParams, epsilon: Optional[float] = None,
               sample_size: Optional[float] = None) -> dict:
    """Bound report plus regime classification; returns a JSON-ready payload."""
    report = evaluate_bounds(params)
    payload: dict = {
        "params": {
            "H": params.smoothness,
            "b": params.batch_size,
            "n": params.iterations,
            "L_star": params.best_loss,
            "comparator_sq_norm": params.comparator_sq_norm,
            "radius": params.radius,
            "ball_constant": params.ball_constant,
        },
        "bounds": report.as_dict(),
    }
    if epsilon is not None:
        m = sample_size if sample_size is not None else params.batch_size * params.iterations
        regimes = [
            classify_regime("sgd", params.batch_size, m, params.best_loss, epsilon),
            classify_regime("ag", params.batch_size, m, params.best_loss, epsilon),
        ]
        serial = max_serial_batch(params.best_loss, epsilon)
        payload["regimes"] = [r.as_dict() for r in regimes]
        payload["serial_limits"] = {"sgd": serial.sgd, "ag": serial.ag, "note": serial.note}
    return payload


def bounds_text(payload: dict) -> str:
    lines = []
    p = payload["params"]
    lines.append("problem: H=%g b=%d n=%d L*=%g ||w*||^2=%g D=%g K=%g"
                 % (p["H"], p["b"], p["n"], p["L_star"], p["comparator_sq_norm"],
                    p["radius"], p["ball_constant"]))
    bounds = payload["bounds"]
    for name in ("sgd", "ag", "smd", "amd"):
        flag = "" if bounds["preconditions_met"][name] else "  [precondition unmet]"
        lines.append("%-4s bound: %.6g%s" % (name, bounds[name], flag))
    for w in bounds["warnings"]:
        lines.append("warning: %s" % w)
    for regime in payload.get("regimes", ()):
        line = "%-4s regime %-16s predicted n ~ %.6g, max serial b ~ %.6g" % (
            regime["algorithm"], regime["regime"], regime["predicted_n"],
            regime["max_serial_b"])
        if regime["note"]:
            line += "  (%s)" % regime["note"]
        lines.append(line)
    serial = payload.get("serial_limits")
    if serial:
        line = "serial batch limits: sgd %.6g, ag %.6g" % (serial["sgd"], serial["ag"])
        if serial["note"]:
            line += "  (%s)" % serial["note"]
        lines.append(line)
    return "\n".join(lines) + "\n"


# -- empirical verification -------------------------------------------------

@dataclass(frozen=True)
class VerifyCheck:
    name: str
    passed: bool
    detail: str

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True)
class VerifyReport:
    checks: tuple[VerifyCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def text(self) -> str:
        lines = ["%s %s: %s" % ("PASS" if c.passed else "FAIL", c.name, c.detail)
                 for c in self.checks]
        lines.append("verify: %s" % ("all checks passed" if self.passed else "FAILURES"))
        return "\n".join(lines) + "\n"

    def as_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.as_dict() for c in self.checks]}


def _variance_reduction_checks(trials: int, seed: int, dim: int = 8,
                               batch_sizes=(1, 2, 4, 16)) -> list[VerifyCheck]:
    # E||mean of b iid mean-zero vectors||^2 <= (K^2/b^2) sum E||x_t||^2;
    # Euclidean K=1 makes it an equality, so the Monte Carlo estimate must
    # sit within sampling error of dim/b on both sides.
    rng = np.random.default_rng(seed)
    checks = []
    chunk = 20000
    for dist in ("rademacher", "gaussian"):
        for b in batch_sizes:
            total = 0.0
            total_sq = 0.0
            done = 0
            while done < trials:
                take = min(chunk, trials - done)
                if dist == "rademacher":
                    draws = rng.integers(0, 2, size=(take, b, dim)) * 2.0 - 1.0
                else:
                    draws = rng.standard_normal((take, b, dim))
                sq = np.sum(np.mean(draws, axis=1) ** 2, axis=1)
                total += float(np.sum(sq))
                total_sq += float(np.sum(sq * sq))
                done += take
            est = total / trials
            var = max(total_sq / trials - est * est, 0.0)
            se = math.sqrt(var / trials)
            target = dim / b
            within = abs(est - target) <= 3.0 * se
            below = est <= target + 3.0 * se
            checks.append(VerifyCheck(
                name="variance-reduction %s b=%d" % (dist, b),
                passed=within and below,
                detail="estimate %.5f vs (K^2/b^2) sum = %.5f, |diff|=%.2g, 3se=%.2g"
                       % (est, target, abs(est - target), 3.0 * se),
            ))
    return checks


def _self_bound_check(draws: int, seed: int) -> VerifyCheck:
    rng = np.random.default_rng(seed)
    dataset, _ = synthesize(200, 12, margin=1.0, label_noise=0.3, seed=seed)
    h = estimate_smoothness("smoothed_hinge", dataset)
    model = LossModel("smoothed_hinge", h)
    worst = math.inf
    for _ in range(draws):
        scale = 10.0 ** rng.uniform(-1, 1)
        w = rng.standard_normal(dataset.dimension) * scale
        z = dataset[int(rng.integers(0, len(dataset)))]
        worst = min(worst, self_bound_residual(model, w, z))
    return VerifyCheck(
        name="self-bounding residual",
        passed=worst >= -1e-12,
        detail="min residual %.3g over %d draws (H=%g)" % (worst, draws, h),
    )


def _admissibility_check() -> VerifyCheck:
    count = 0
    for n in (3, 10, 100, 1000, 10000):
        for b in (1, 8, 64, 1024):
            params = ProblemParams(
                smoothness=1.0, batch_size=b, iterations=max(n, 2),
                best_loss=0.0, comparator_sq_norm=1.0, radius=1.0)
            p = accel_exponent(b, n)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                gamma = accel_base_step(params, p)
            schedule = Schedule("ag", gamma=gamma, power=p)
            report = check_admissibility(schedule, 1.0, n)
            if not report.ok:
                return VerifyCheck(
                    name="schedule admissibility",
                    passed=False,
                    detail="violation at n=%d b=%d i=%s: %s"
                           % (n, b, report.at_iteration, report.violation),
                )
            count += 1
    return VerifyCheck(
        name="schedule admissibility",
        passed=True,
        detail="all %d schedules satisfy both step-size conditions" % count,
    )


def cmd_verify(trials: int = 100000, seed: int = 0) -> VerifyReport:
    """Monte Carlo checks of the variance-reduction identity, the
    gradient-norm self-bound, and schedule admissibility."""
    if trials < 1000:
        raise ValidationError("verify needs at least 1000 trials")
    checks = _variance_reduction_checks(trials, seed)
    checks.append(_self_bound_check(10000, seed + 1))
    checks.append(_admissibility_check())
    return VerifyReport(tuple(checks))


def cmd_convert(input_path: str, output_path: str) -> int:
    """Parse a LIBSVM file and re-emit it canonically; returns example count."""
    dataset = read_libsvm(input_path)
    save_libsvm(dataset, output_path)
    return len(dataset)
