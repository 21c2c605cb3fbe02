"""Mini-batch stochastic convex optimization.

Plain and accelerated mini-batched first-order methods over smooth
non-negative losses, their mirror-descent generalizations, the closed-form
step-size schedules (including the polynomially growing gamma_i = gamma *
i**p family), numeric evaluation of the convergence guarantees, and a
benchmark harness with LIBSVM data handling.
"""

from . import kernels
from .analysis import classify_regime, evaluate_bounds, max_serial_batch
from .dataio import Dataset, Example, censor, parse_libsvm, read_libsvm, \
    save_libsvm, split, synthesize, write_libsvm
from .geometry import MirrorMap
from .losses import LossModel, MiniBatch, dataset_loss, estimate_smoothness, \
    loss_gradient, loss_value, minibatch_value_grad, self_bound_residual
from .optimizers import DivergenceError, RunConfig, RunResult, run_ag, run_amd, \
    run_sgd, run_smd
from .schedules import ProblemParams, Schedule, accel_base_step, accel_exponent, \
    accel_exponent_figure, check_admissibility, grid_select, sgd_step_size
from .vectors import DenseVector, SparseVector, axpy, dot, norm

__version__ = "0.1.0"
