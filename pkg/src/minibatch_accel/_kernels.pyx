# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch kernels: per-example loss terms, ordered reductions.

Mirrors _kernels_py operation for operation.  Deterministic mode sums each
example's score in ascending stored-index order and combines the batch with
a fixed pairwise tree (binary-counter scheme); results are bit-identical to
the pure fallback in that mode.
"""

import numpy as np

COMPILED = True

SMOOTHED_HINGE = 0
SQUARED = 1


def seq_dot(const double[::1] a, const double[::1] b):
    """Inner product accumulated in ascending index order."""
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double total = 0.0
    if b.shape[0] != n:
        raise ValueError("dimension mismatch: %d vs %d" % (a.shape[0], b.shape[0]))
    for i in range(n):
        total += a[i] * b[i]
    return total


def seq_sparse_dot(const long long[::1] idx, const double[::1] vals, const double[::1] w):
    """Sparse-dense inner product, ascending stored-index order; idx is 0-based."""
    cdef Py_ssize_t k, nnz = idx.shape[0]
    cdef double total = 0.0
    for k in range(nnz):
        total += vals[k] * w[idx[k]]
    return total


cdef inline double _example_terms(const long long[::1] indptr, const long long[::1] idx,
                                  const double[::1] vals, const double[::1] labels,
                                  const double[::1] w, Py_ssize_t t, int kind,
                                  double *gcoef) noexcept:
    cdef Py_ssize_t lo = indptr[t]
    cdef Py_ssize_t hi = indptr[t + 1]
    cdef Py_ssize_t k
    cdef double s = 0.0
    cdef double y, m, q, r
    for k in range(lo, hi):
        s += vals[k] * w[idx[k]]
    y = labels[t]
    if kind == 0:
        m = y * s
        if m <= 0.0:
            gcoef[0] = -y
            return 0.5 - m
        if m > 1.0:
            gcoef[0] = 0.0
            return 0.0
        q = 1.0 - m
        gcoef[0] = -q * y
        return 0.5 * q * q
    r = s - y
    gcoef[0] = r
    return 0.5 * r * r


def batch_value_grad(const long long[::1] indptr, const long long[::1] idx,
                     const double[::1] vals, const double[::1] labels,
                     const double[::1] w, Py_ssize_t start, Py_ssize_t stop,
                     int kind, bint deterministic, double[::1] out):
    """Mean loss and mean gradient over examples [start, stop).

    The mean gradient is written into ``out`` (overwritten); the mean loss
    is returned.  ``deterministic`` selects the fixed-tree reduction.
    """
    cdef Py_ssize_t b = stop - start
    cdef Py_ssize_t d = out.shape[0]
    cdef Py_ssize_t t, k, j, lo, hi
    cdef int level, nlev
    cdef unsigned long long occ = 0
    cdef double val, g, tval, total

    if not deterministic:
        total = 0.0
        for j in range(d):
            out[j] = 0.0
        for t in range(start, stop):
            val = _example_terms(indptr, idx, vals, labels, w, t, kind, &g)
            total += val
            lo = indptr[t]
            hi = indptr[t + 1]
            for k in range(lo, hi):
                out[idx[k]] += g * vals[k]
        for j in range(d):
            out[j] /= b
        return total / b

    nlev = 1
    while (<Py_ssize_t>1 << nlev) <= b:
        nlev += 1
    nlev += 1
    lev_vec_arr = np.zeros((nlev, d))
    lev_val_arr = np.zeros(nlev)
    tmp_arr = np.zeros(d)
    cdef double[:, ::1] lev_vec = lev_vec_arr
    cdef double[::1] lev_val = lev_val_arr
    cdef double[::1] tmp = tmp_arr

    for t in range(start, stop):
        val = _example_terms(indptr, idx, vals, labels, w, t, kind, &g)
        lo = indptr[t]
        hi = indptr[t + 1]
        for j in range(d):
            tmp[j] = 0.0
        for k in range(lo, hi):
            tmp[idx[k]] = g * vals[k]
        tval = val
        level = 0
        while occ & (<unsigned long long>1 << level):
            for j in range(d):
                tmp[j] += lev_vec[level, j]
            tval += lev_val[level]
            occ ^= <unsigned long long>1 << level
            level += 1
        for j in range(d):
            lev_vec[level, j] = tmp[j]
        lev_val[level] = tval
        occ |= <unsigned long long>1 << level

    for j in range(d):
        out[j] = 0.0
    total = 0.0
    level = 0
    while occ:
        if occ & 1:
            for j in range(d):
                out[j] += lev_vec[level, j]
            total += lev_val[level]
        occ >>= 1
        level += 1
    for j in range(d):
        out[j] /= b
    return total / b


def mean_loss(const long long[::1] indptr, const long long[::1] idx,
              const double[::1] vals, const double[::1] labels,
              const double[::1] w, int kind,
              Py_ssize_t start, Py_ssize_t stop):
    """Mean loss over examples [start, stop); fast path, unordered reduction."""
    cdef Py_ssize_t t
    cdef double g, total = 0.0
    for t in range(start, stop):
        total += _example_terms(indptr, idx, vals, labels, w, t, kind, &g)
    return total / (stop - start)


def misclassified_fraction(const long long[::1] indptr, const long long[::1] idx,
                           const double[::1] vals, const double[::1] labels,
                           const double[::1] w):
    """Fraction of examples with sign(w.x) != y; sign(0) counts as +1."""
    cdef Py_ssize_t t, k, lo, hi, m = labels.shape[0]
    cdef Py_ssize_t wrong = 0
    cdef double s, pred
    for t in range(m):
        lo = indptr[t]
        hi = indptr[t + 1]
        s = 0.0
        for k in range(lo, hi):
            s += vals[k] * w[idx[k]]
        pred = 1.0 if s >= 0.0 else -1.0
        if pred != labels[t]:
            wrong += 1
    return <double>wrong / <double>m


def max_sq_row_norm(const long long[::1] indptr, const double[::1] vals):
    """Largest squared Euclidean norm over the rows of a packed matrix."""
    cdef Py_ssize_t t, k, m = indptr.shape[0] - 1
    cdef double s, best = 0.0
    for t in range(m):
        s = 0.0
        for k in range(indptr[t], indptr[t + 1]):
            s += vals[k] * vals[k]
        if s > best:
            best = s
    return best
