"""Step-size schedules for the four training loops, and their validity checks.

The plain methods (sgd, smd) use one constant step.  The accelerated
methods (ag, amd) use the pair

    beta_i = (i + 1) / 2,      gamma_i = gamma * i**power,

with power in [0, 1].  The closed forms below derive the constant step,
the base step ``gamma`` and the exponent ``power`` from the problem
parameters; ``check_admissibility`` verifies the two conditions every
accelerated schedule must satisfy,

    gamma_{i+1} (beta_{i+1} - 1) <= beta_i gamma_i   and
    2 H gamma_i <= beta_i        for i = 1..n,  beta_1 = 1,

which hold for any gamma <= 1/(4H) and power in [0, 1].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

__all__ = [
    "ProblemParams",
    "Schedule",
    "AdmissibilityReport",
    "sgd_step_size",
    "accel_exponent",
    "accel_exponent_figure",
    "accel_base_step",
    "schedule_terms",
    "check_admissibility",
    "grid_select",
    "guarantee_warnings",
]

_REL_SLACK = 1e-12  # comparisons tolerate rounding of algebraically equal sides


@dataclass(frozen=True)
class ProblemParams:
    """Quantities the closed-form step sizes and bounds depend on.

    ``best_loss`` is the expected loss of the comparator; it is 0 in the
    separable case.  ``comparator_sq_norm`` is its squared Euclidean norm.
    ``potential_at_comparator`` defaults to half the squared norm, the
    Euclidean potential.  ``ball_constant`` is the mirror map's constant
    (1 for Euclidean); ``radius`` bounds the feasible set.
    """

    smoothness: float
    batch_size: int
    iterations: int
    best_loss: float
    comparator_sq_norm: float
    radius: float
    ball_constant: float = 1.0
    potential_at_comparator: Optional[float] = None

    def __post_init__(self):
        if not (self.smoothness > 0 and math.isfinite(self.smoothness)):
            raise ValueError("smoothness must be positive and finite")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if self.best_loss < 0:
            raise ValueError("best_loss must be nonnegative")
        if self.comparator_sq_norm < 0:
            raise ValueError("comparator_sq_norm must be nonnegative")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError("radius must be positive and finite")
        if self.ball_constant <= 0:
            raise ValueError("ball_constant must be positive")

    @property
    def r_star(self) -> float:
        """Potential at the comparator; Euclidean default 0.5 ||w*||^2."""
        if self.potential_at_comparator is not None:
            return self.potential_at_comparator
        return 0.5 * self.comparator_sq_norm


_KINDS = ("sgd", "ag", "smd", "amd")


@dataclass(frozen=True)
class Schedule:
    """Resolved step sizes for one run."""

    kind: str
    eta: Optional[float] = None
    gamma: Optional[float] = None
    power: Optional[float] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError("unknown schedule kind %r" % (self.kind,))
        if self.kind in ("sgd", "smd"):
            if self.eta is None or self.eta < 0:
                raise ValueError("sgd/smd schedules need eta >= 0")
        else:
            if self.gamma is None or self.gamma < 0:
                raise ValueError("ag/amd schedules need gamma >= 0")
            if self.power is None or not 0.0 <= self.power <= 1.0:
                raise ValueError("ag/amd schedules need power in [0, 1]")

    @property
    def accelerated(self) -> bool:
        return self.kind in ("ag", "amd")

    @property
    def step_scale(self) -> float:
        return self.gamma if self.accelerated else self.eta  # type: ignore[return-value]

    def with_step(self, value: float) -> "Schedule":
        if self.accelerated:
            return replace(self, gamma=value)
        return replace(self, eta=value)


def sgd_step_size(params: ProblemParams, general: bool = False) -> float:
    """Constant step for the averaged-iterate methods.

    The Euclidean form is min{1/(2H), r} where r is a ratio that tends to
    b/H as best_loss -> 0 (so the limit is 1/(2H)).  The general form adds
    the clamp b/(32 H K^2) and uses the comparator's potential; its ratio
    tends to b/(16 H K^2).
    """
    h = params.smoothness
    b = params.batch_size
    n = params.iterations
    lstar = params.best_loss
    terms = [1.0 / (2.0 * h)]
    if general:
        k2 = params.ball_constant ** 2
        terms.append(b / (32.0 * h * k2))
        if lstar == 0.0:
            terms.append(b / (16.0 * h * k2))
        else:
            r = params.r_star
            num = math.sqrt(32.0 * b * r / (lstar * h * k2 * n))
            den = 16.0 * (1.0 + math.sqrt(32.0 * h * k2 * r / (lstar * b * n)))
            terms.append(num / den)
    else:
        wsq = params.comparator_sq_norm
        if lstar == 0.0:
            terms.append(b / h)
        else:
            num = math.sqrt(b * wsq / (lstar * h * n))
            den = 1.0 + math.sqrt(h * wsq / (lstar * b * n))
            terms.append(num / den)
    return min(terms)


def accel_exponent(batch_size: int, iterations: int) -> float:
    """Step-growth exponent from batch size and iteration count.

    Natural logarithms; the result is clamped to [0, 1].  Needs
    iterations >= 3 so that both log(n - 1) and log log(n) are positive.
    """
    b, n = batch_size, iterations
    if n < 3:
        raise ValueError("the exponent formula needs at least 3 iterations")
    if b < 1:
        raise ValueError("batch_size must be positive")
    first = math.log(b) / (2.0 * math.log(n - 1))
    loglog = math.log(math.log(n))
    den = math.log(b * (n - 1)) - loglog
    second = math.inf if den <= 0 else loglog / (2.0 * den)
    return min(max(first, second), 1.0)


def accel_exponent_figure(batch_size: int, iterations: int) -> float:
    """The simpler plotting convention log(b) / (2 log(n - 1)), clamped to [0, 1]."""
    b, n = batch_size, iterations
    if n < 3:
        raise ValueError("needs at least 3 iterations")
    if b < 1:
        raise ValueError("batch_size must be positive")
    return min(max(math.log(b) / (2.0 * math.log(n - 1)), 0.0), 1.0)


def accel_base_step(params: ProblemParams, power: float,
                    euclidean_variant: bool = False) -> float:
    """Base step ``gamma`` of the accelerated schedule gamma_i = gamma * i**power.

    The canonical form is the general one, whose third term carries the
    factor (6 R* / (1.5 H D^2 + L*))^(power/(2 power + 1)).  The flagged
    ``euclidean_variant`` uses the alternative last factor
    (||w*||^2 / (4 H ||w*||^2 + sqrt(4 H ||w*||^2 L*)))^(power/(2 power + 1)).
    When best_loss = 0 the middle term diverges and drops out of the min.
    Emits a warning (never an error) when the guarantee's preconditions on
    the iteration count are unmet.
    """
    if not 0.0 <= power <= 1.0:
        raise ValueError("power must lie in [0, 1]")
    h = params.smoothness
    b = params.batch_size
    n = params.iterations
    if n < 2:
        raise ValueError("accelerated schedules need at least 2 iterations")
    lstar = params.best_loss
    k2 = params.ball_constant ** 2
    p = power
    terms = [1.0 / (4.0 * h)]
    for message in guarantee_warnings(params):
        warnings.warn(message, stacklevel=2)
    if euclidean_variant:
        wsq = params.comparator_sq_norm
        if lstar > 0.0 and wsq > 0.0:
            terms.append(math.sqrt(b * wsq / (348.0 * h * lstar * (n - 1) ** (2 * p + 1))))
        denom = 4.0 * h * wsq + math.sqrt(4.0 * h * wsq * lstar)
        last = 0.0 if denom == 0.0 else (wsq / denom) ** (p / (2 * p + 1))
        terms.append((b / (1044.0 * h * (n - 1) ** (2 * p))) ** ((p + 1) / (2 * p + 1)) * last)
    else:
        r = params.r_star
        if lstar > 0.0 and r > 0.0:
            terms.append(math.sqrt(b * r / (174.0 * h * k2 * lstar * (n - 1) ** (2 * p + 1))))
        l0 = 1.5 * h * params.radius ** 2 + lstar
        terms.append(
            (b / (1044.0 * h * k2 * (n - 1) ** (2 * p))) ** ((p + 1) / (2 * p + 1))
            * (6.0 * r / l0) ** (p / (2 * p + 1))
        )
    return min(terms)


def guarantee_warnings(params: ProblemParams) -> list[str]:
    """Unmet preconditions of the accelerated guarantee, as warning strings.

    The stated condition is on the iteration count,
    n >= max{783 K^2, 87 K^2 L* / (H D^2)}; the derivation arrives at the
    same threshold on the sample size n*b.  Both readings are surfaced.
    """
    n = params.iterations
    b = params.batch_size
    k2 = params.ball_constant ** 2
    threshold = max(783.0 * k2, 87.0 * k2 * params.best_loss /
                    (params.smoothness * params.radius ** 2))
    out = []
    if n < threshold:
        msg = ("accelerated guarantee precondition unmet: iterations n=%d < %.6g "
               "(the schedule stays well-defined; only the guarantee lapses)"
               % (n, threshold))
        if n * b >= threshold:
            msg += ("; note the sample-size reading n*b=%d >= %.6g is satisfied"
                    % (n * b, threshold))
        else:
            msg += "; the sample-size reading n*b=%d also falls short" % (n * b)
        out.append(msg)
    return out


def schedule_terms(schedule: Schedule, i: int) -> tuple[float, float]:
    """(step_i, beta_i) at iteration i >= 1.

    Accelerated schedules return (gamma * i**power, (i + 1)/2); the plain
    ones return (eta, 1.0).
    """
    if i < 1:
        raise ValueError("iterations are 1-based")
    if schedule.accelerated:
        return schedule.gamma * float(i) ** schedule.power, (i + 1) / 2.0
    return schedule.eta, 1.0


@dataclass(frozen=True)
class AdmissibilityReport:
    """Outcome of checking the accelerated step-size conditions up to n."""

    ok: bool
    checked_n: int
    violation: Optional[str] = None
    at_iteration: Optional[int] = None

    def __bool__(self) -> bool:
        return self.ok


def check_admissibility(schedule: Schedule, smoothness: float, n: int) -> AdmissibilityReport:
    """Check the two accelerated step-size conditions for i = 1..n.

    Violations are report content, not errors.  Comparisons allow a 1e-12
    relative slack because both sides agree algebraically at power = 1 and
    may differ by one rounding.
    """
    if not schedule.accelerated:
        return AdmissibilityReport(True, n)
    h = smoothness
    gamma = schedule.gamma
    if gamma <= 0.0:
        return AdmissibilityReport(False, n, "step sizes must be positive: gamma=%r" % gamma, 1)
    step_prev, beta_prev = schedule_terms(schedule, 1)
    if beta_prev != 1.0:
        return AdmissibilityReport(False, n, "beta_1 must equal 1", 1)
    for i in range(1, n + 1):
        step_i, beta_i = (step_prev, beta_prev) if i == 1 else schedule_terms(schedule, i)
        if 2.0 * h * step_i > beta_i * (1.0 + _REL_SLACK):
            return AdmissibilityReport(
                False, n,
                "2 H gamma_i > beta_i (%.17g > %.17g)" % (2.0 * h * step_i, beta_i), i)
        step_next, beta_next = schedule_terms(schedule, i + 1)
        if step_next * (beta_next - 1.0) > step_i * beta_i * (1.0 + _REL_SLACK):
            return AdmissibilityReport(
                False, n,
                "gamma_{i+1}(beta_{i+1}-1) > beta_i gamma_i (%.17g > %.17g)"
                % (step_next * (beta_next - 1.0), step_i * beta_i), i)
        step_prev, beta_prev = step_next, beta_next
    return AdmissibilityReport(True, n)


def grid_select(base: Schedule, multipliers: Sequence[float],
                evaluate: Callable[[Schedule], float]) -> Schedule:
    """Scale the base step by each multiplier and keep the best by callback.

    The callback scores a candidate (validation loss, say); non-finite
    scores mark a candidate unusable.  Ties go to the smaller multiplier.
    """
    if not multipliers:
        raise ValueError("need at least one multiplier")
    if any(m <= 0 for m in multipliers):
        raise ValueError("multipliers must be positive")
    best: Optional[tuple[float, float, Schedule]] = None
    for mult in multipliers:
        candidate = base.with_step(base.step_scale * mult)
        score = evaluate(candidate)
        if score is None or not math.isfinite(score):
            continue
        key = (score, mult)
        if best is None or key < (best[0], best[1]):
            best = (score, mult, candidate)
    if best is None:
        raise ValueError("every candidate scored non-finite; nothing to select")
    return best[2]
