"""Pure NumPy fallback for the compiled batch kernels.

Deterministic-mode reductions replicate the compiled extension operation
for operation: per-example scores are sequential ascending-index sums, and
the batch is combined with a fixed pairwise tree (binary-counter scheme),
so both backends produce bit-identical results in that mode.  Fast mode
uses vectorized NumPy reductions whose ordering is unspecified.
"""

import numpy as np

COMPILED = False

SMOOTHED_HINGE = 0
SQUARED = 1


def seq_dot(a, b):
    """Inner product accumulated in ascending index order."""
    if a.shape[0] != b.shape[0]:
        raise ValueError("dimension mismatch: %d vs %d" % (a.shape[0], b.shape[0]))
    total = 0.0
    for x, y in zip(a.tolist(), b.tolist()):
        total += x * y
    return total


def seq_sparse_dot(idx, vals, w):
    """Sparse-dense inner product, ascending stored-index order; idx is 0-based."""
    total = 0.0
    wl = w.tolist()
    for j, v in zip(idx.tolist(), vals.tolist()):
        total += v * wl[j]
    return total


def _hinge_terms(margin):
    # value and d(value)/d(margin) of the smoothed hinge
    if margin <= 0.0:
        return 0.5 - margin, -1.0
    if margin > 1.0:
        return 0.0, 0.0
    q = 1.0 - margin
    return 0.5 * q * q, -q


def _example_terms(indptr, idx, vals, labels, w, t, kind):
    # (loss value, gradient coefficient on the feature vector) for example t
    lo = int(indptr[t])
    hi = int(indptr[t + 1])
    s = 0.0
    for k in range(lo, hi):
        s += float(vals[k]) * float(w[idx[k]])
    y = float(labels[t])
    if kind == SMOOTHED_HINGE:
        val, dm = _hinge_terms(y * s)
        return val, dm * y, lo, hi
    r = s - y
    return 0.5 * r * r, r, lo, hi


def batch_value_grad(indptr, idx, vals, labels, w, start, stop, kind, deterministic, out):
    """Mean loss and mean gradient over examples [start, stop).

    The mean gradient is written into ``out`` (overwritten); the mean loss
    is returned.  ``deterministic`` selects the fixed-tree reduction.
    """
    b = stop - start
    d = out.shape[0]
    if not deterministic:
        return _batch_fast(indptr, idx, vals, labels, w, start, stop, kind, out)

    nlev = b.bit_length() + 1
    lev_vec = np.zeros((nlev, d))
    lev_val = np.zeros(nlev)
    tmp = np.zeros(d)
    occ = 0
    for t in range(start, stop):
        val, g, lo, hi = _example_terms(indptr, idx, vals, labels, w, t, kind)
        tmp[:] = 0.0
        tmp[idx[lo:hi]] = g * vals[lo:hi]
        tval = val
        level = 0
        while occ & (1 << level):
            tmp += lev_vec[level]
            tval += lev_val[level]
            occ ^= 1 << level
            level += 1
        lev_vec[level][:] = tmp
        lev_val[level] = tval
        occ |= 1 << level
    out[:] = 0.0
    total = 0.0
    level = 0
    while occ:
        if occ & 1:
            out += lev_vec[level]
            total += lev_val[level]
        occ >>= 1
        level += 1
    out /= b
    return total / b


def _batch_fast(indptr, idx, vals, labels, w, start, stop, kind, out):
    b = stop - start
    scores = np.empty(b)
    for r, t in enumerate(range(start, stop)):
        lo = int(indptr[t])
        hi = int(indptr[t + 1])
        scores[r] = np.dot(vals[lo:hi], w[idx[lo:hi]]) if hi > lo else 0.0
    y = labels[start:stop]
    if kind == SMOOTHED_HINGE:
        m = y * scores
        values = np.where(m <= 0.0, 0.5 - m, np.where(m > 1.0, 0.0, 0.5 * (1.0 - m) ** 2))
        gcoef = np.where(m <= 0.0, -1.0, np.where(m > 1.0, 0.0, m - 1.0)) * y
    else:
        r = scores - y
        values = 0.5 * r * r
        gcoef = r
    lo0 = int(indptr[start])
    hi0 = int(indptr[stop])
    if hi0 > lo0:
        counts = np.diff(indptr[start:stop + 1])
        weights = np.repeat(gcoef, counts) * vals[lo0:hi0]
        acc = np.bincount(idx[lo0:hi0], weights=weights, minlength=out.shape[0])
        out[:] = acc / b
    else:
        out[:] = 0.0
    return float(np.mean(values))


def mean_loss(indptr, idx, vals, labels, w, kind, start, stop):
    """Mean loss over examples [start, stop); fast path, unordered reduction."""
    b = stop - start
    values = np.empty(b)
    for r, t in enumerate(range(start, stop)):
        lo = int(indptr[t])
        hi = int(indptr[t + 1])
        s = np.dot(vals[lo:hi], w[idx[lo:hi]]) if hi > lo else 0.0
        y = float(labels[t])
        if kind == SMOOTHED_HINGE:
            values[r] = _hinge_terms(y * s)[0]
        else:
            r2 = s - y
            values[r] = 0.5 * r2 * r2
    return float(np.mean(values))


def misclassified_fraction(indptr, idx, vals, labels, w):
    """Fraction of examples with sign(w.x) != y; sign(0) counts as +1."""
    m = labels.shape[0]
    wrong = 0
    for t in range(m):
        lo = int(indptr[t])
        hi = int(indptr[t + 1])
        s = np.dot(vals[lo:hi], w[idx[lo:hi]]) if hi > lo else 0.0
        pred = 1.0 if s >= 0.0 else -1.0
        if pred != labels[t]:
            wrong += 1
    return wrong / m


def max_sq_row_norm(indptr, vals):
    """Largest squared Euclidean norm over the rows of a packed matrix."""
    best = 0.0
    for t in range(indptr.shape[0] - 1):
        lo = int(indptr[t])
        hi = int(indptr[t + 1])
        s = 0.0
        for k in range(lo, hi):
            v = float(vals[k])
            s += v * v
        if s > best:
            best = s
    return best
