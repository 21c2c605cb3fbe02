"""Benchmark the compiled kernels against the pure NumPy fallback.

Times the mini-batch value/gradient kernel in both reduction modes on a
synthetic dataset, plus one full training run per backend.  Run as

    python benchmarks/kernel_benchmark.py [--m 16384] [--d 64] [--b 64]
"""

import argparse
import time

import numpy as np

from minibatch_accel import _kernels_py
from minibatch_accel.dataio import synthesize
from minibatch_accel.geometry import MirrorMap
from minibatch_accel.losses import LossModel, estimate_smoothness
from minibatch_accel.optimizers import RunConfig, run_sgd
from minibatch_accel.schedules import Schedule

try:
    from minibatch_accel import _kernels
except ImportError:
    _kernels = None


def time_kernel(impl, packed, w, b, deterministic, repeats):
    out = np.zeros(w.shape[0])
    m = packed.labels.shape[0]
    n = m // b
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for i in range(n):
            impl.batch_value_grad(packed.indptr, packed.indices, packed.values,
                                  packed.labels, w, i * b, (i + 1) * b, 0,
                                  deterministic, out)
        best = min(best, time.perf_counter() - t0)
    return best, n


def time_run(dataset, model, b):
    # end-to-end timing uses whichever backend the package selected at import
    geo = MirrorMap.euclidean(dataset.dimension, 10.0)
    n = len(dataset) // b
    t0 = time.perf_counter()
    run_sgd(model, geo, Schedule("sgd", eta=1.0 / (2 * model.smoothness)),
            dataset, RunConfig(batch_size=b, iterations=n))
    return time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--m", type=int, default=16384)
    parser.add_argument("--d", type=int, default=64)
    parser.add_argument("--b", type=int, default=64)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    dataset, _ = synthesize(args.m, args.d, margin=1.5, label_noise=0.05, seed=0)
    model = LossModel("smoothed_hinge", estimate_smoothness("smoothed_hinge", dataset))
    packed = dataset.packed
    w = np.random.default_rng(1).standard_normal(args.d) * 0.1

    backends = [("pure", _kernels_py)]
    if _kernels is not None:
        backends.insert(0, ("compiled", _kernels))

    print("m=%d d=%d b=%d (%d batches per pass)" % (args.m, args.d, args.b,
                                                    args.m // args.b))
    baseline = {}
    for label, impl in backends:
        for det in (True, False):
            seconds, n = time_kernel(impl, packed, w, args.b, det, args.repeats)
            mode = "deterministic" if det else "fast"
            key = mode
            rate = args.m / seconds / 1e6
            line = "%-8s %-13s %8.4f s/pass  %6.2f M examples/s" % (
                label, mode, seconds, rate)
            if label == "pure" and key in baseline:
                line += "   (compiled speedup %.1fx)" % (seconds / baseline[key])
            else:
                baseline[key] = seconds
            print(line)

    from minibatch_accel import kernels
    elapsed = time_run(dataset, model, args.b)
    print("end-to-end run_sgd on the %s backend: %.3f s" %
          (kernels.backend_name(), elapsed))


if __name__ == "__main__":
    main()
