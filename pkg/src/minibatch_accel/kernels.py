"""Backend selection for the compute kernels.

The compiled extension is preferred; the pure NumPy fallback is selected
when it is unavailable or when MINIBATCH_ACCEL_PURE is set to a non-empty
value other than "0".  Both backends share one contract, and their
deterministic-mode results are bit-identical.
"""

import os

if os.environ.get("MINIBATCH_ACCEL_PURE", "0") not in ("", "0"):
    from . import _kernels_py as impl
else:
    try:
        from . import _kernels as impl  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as impl

COMPILED = impl.COMPILED
SMOOTHED_HINGE = impl.SMOOTHED_HINGE
SQUARED = impl.SQUARED

seq_dot = impl.seq_dot
seq_sparse_dot = impl.seq_sparse_dot
batch_value_grad = impl.batch_value_grad
mean_loss = impl.mean_loss
misclassified_fraction = impl.misclassified_fraction
max_sq_row_norm = impl.max_sq_row_norm


def backend_name():
    return "compiled" if COMPILED else "pure"
