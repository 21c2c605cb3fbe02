"""Command-line interface.

Subcommands: train, sweep-b, sweep-p, censor, bounds, verify, convert.
Exit codes: 0 on success, 1 for validation or input errors, 2 when a run
diverges (step size too large for the data).
"""

from __future__ import annotations

import argparse
import json
import sys

from .dataio import LibsvmParseError
from .harness import (
    ExperimentSpec,
    SynthSpec,
    ValidationError,
    bounds_text,
    cmd_bounds,
    cmd_censor,
    cmd_convert,
    cmd_sweep_b,
    cmd_sweep_p,
    cmd_train,
    cmd_verify,
)
from .optimizers import DivergenceError
from .schedules import ProblemParams


class _CLIError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # map argparse's exit-2 to our exit-1
        raise _CLIError(message)


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok)


def _synth(text: str) -> SynthSpec:
    parts = text.split(",")
    if len(parts) != 4:
        raise _CLIError("--synthesize wants m,d,margin,noise")
    return SynthSpec(int(parts[0]), int(parts[1]), float(parts[2]), float(parts[3]))


def _add_common(sub: argparse.ArgumentParser) -> None:
    src = sub.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="LIBSVM input file")
    src.add_argument("--synthesize", help="m,d,margin,noise synthetic dataset")
    sub.add_argument("--data-seed", type=int, default=0, help="generator seed for --synthesize")
    sub.add_argument("--algo", default="sgd", help="comma list of sgd,ag,smd,amd")
    sub.add_argument("--b", default="1", help="batch size (comma list for sweep-b)")
    sub.add_argument("--m", type=int, default=None, help="fixed training budget n*b")
    sub.add_argument("--p", default=None, help="step-growth exponent(s) in [0,1]")
    sub.add_argument("--seeds", default="0", help="comma list of shuffle seeds")
    sub.add_argument("--step-mode", default="theoretical",
                     choices=("theoretical", "grid"))
    sub.add_argument("--grid", default=None,
                     help="comma list of step multipliers for grid mode")
    sub.add_argument("--no-projection", action="store_true")
    sub.add_argument("--deterministic", action="store_true",
                     help="fixed-tree reductions and zeroed timing columns")
    sub.add_argument("--threads", type=int, default=1,
                     help="thread pool size for independent sweep cells")
    sub.add_argument("--trace-every", type=int, default=1)
    sub.add_argument("--lstar", type=float, default=0.0,
                     help="comparator loss L* used by the theoretical step sizes")
    sub.add_argument("--wnorm", type=float, default=1.0, help="comparator norm ||w*||")
    sub.add_argument("--radius", type=float, default=None,
                     help="feasible-ball radius D (default: ||w*||)")
    sub.add_argument("--out", default=None, help="results CSV path")


def _spec_from_args(args) -> ExperimentSpec:
    grid = tuple(_floats(args.grid)) if args.grid else ExperimentSpec.grid_multipliers
    return ExperimentSpec(
        algorithms=tuple(tok for tok in args.algo.split(",") if tok),
        data_path=args.data,
        synth=_synth(args.synthesize) if args.synthesize else None,
        data_seed=args.data_seed,
        batch_sizes=_ints(args.b),
        p_values=_floats(args.p) if args.p else None,
        fixed_m=args.m,
        seeds=_ints(args.seeds),
        step_mode=args.step_mode,
        grid_multipliers=grid,
        projection_enabled=not args.no_projection,
        deterministic=args.deterministic,
        trace_every=args.trace_every,
        threads=args.threads,
        best_loss=args.lstar,
        comparator_norm=args.wnorm,
        radius=args.radius,
        out_path=args.out,
    )


def _build_parser() -> _Parser:
    parser = _Parser(prog="mbaccel",
                     description="mini-batch stochastic convex optimization harness")
    subs = parser.add_subparsers(dest="command", required=True)

    for name in ("train", "sweep-b", "sweep-p"):
        sub = subs.add_parser(name)
        _add_common(sub)

    cen = subs.add_parser("censor")
    cen.add_argument("--data", required=True)
    cen.add_argument("--out", required=True)
    cen.add_argument("--budget", type=int, default=1024, help="gradient-step budget")
    cen.add_argument("--seed", type=int, default=0)

    bnd = subs.add_parser("bounds")
    bnd.add_argument("--H", type=float, required=True, help="smoothness constant")
    bnd.add_argument("--b", type=int, required=True)
    bnd.add_argument("--n", type=int, required=True)
    bnd.add_argument("--lstar", type=float, default=0.0)
    bnd.add_argument("--wnorm", type=float, default=1.0)
    bnd.add_argument("--radius", type=float, default=None)
    bnd.add_argument("--ballk", type=float, default=1.0,
                     help="mirror-map unit-ball constant K")
    bnd.add_argument("--m", type=float, default=None, help="sample size for regimes")
    bnd.add_argument("--epsilon", type=float, default=None,
                     help="target suboptimality for regime classification")
    bnd.add_argument("--json", action="store_true", help="emit JSON instead of text")
    bnd.add_argument("--out", default=None, help="write the JSON payload here")

    ver = subs.add_parser("verify")
    ver.add_argument("--trials", type=int, default=100000)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--json", action="store_true")

    con = subs.add_parser("convert")
    con.add_argument("--data", required=True)
    con.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "train":
            table = cmd_train(_spec_from_args(args))
            sys.stdout.write(table.to_csv())
        elif args.command == "sweep-b":
            table = cmd_sweep_b(_spec_from_args(args))
            sys.stdout.write(table.summary_csv())
        elif args.command == "sweep-p":
            table = cmd_sweep_p(_spec_from_args(args))
            sys.stdout.write(table.to_csv())
        elif args.command == "censor":
            summary = cmd_censor(args.data, args.out, budget=args.budget, seed=args.seed)
            sys.stdout.write(json.dumps(summary.as_dict()) + "\n")
        elif args.command == "bounds":
            params = ProblemParams(
                smoothness=args.H, batch_size=args.b, iterations=args.n,
                best_loss=args.lstar, comparator_sq_norm=args.wnorm ** 2,
                radius=args.radius if args.radius is not None else args.wnorm,
                ball_constant=args.ballk,
            )
            payload = cmd_bounds(params, epsilon=args.epsilon, sample_size=args.m)
            if args.out:
                with open(args.out, "w", encoding="utf-8") as fh:
                    json.dump(payload, fh, indent=2)
            sys.stdout.write(json.dumps(payload) + "\n" if args.json
                             else bounds_text(payload))
        elif args.command == "verify":
            report = cmd_verify(trials=args.trials, seed=args.seed)
            sys.stdout.write(json.dumps(report.as_dict()) + "\n" if args.json
                             else report.text())
            if not report.passed:
                return 1
        elif args.command == "convert":
            count = cmd_convert(args.data, args.out)
            sys.stdout.write("wrote %d examples\n" % count)
    except _CLIError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 1
    except (ValidationError, LibsvmParseError, ValueError) as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 1
    except DivergenceError as exc:
        sys.stderr.write("divergence: %s\n" % exc)
        return 2
    except OSError as exc:
        sys.stderr.write("io error: %s\n" % exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
