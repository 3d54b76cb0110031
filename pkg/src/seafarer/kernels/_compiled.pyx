# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: per-example SGD training and LinUCB scoring.

Operation order matches kernels.pure exactly so the two backends agree
bit-for-bit on the SGD trajectory (both accumulate in index order and call
libm exp).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, isfinite, sqrt

cnp.import_array()

BACKEND_NAME = "compiled"


def sgd_logistic(double[:, ::1] X, double[::1] y, long long[::1] order,
                 double lr, double momentum):
    """Per-example SGD on logistic loss with classical momentum.

    Same contract as the pure fallback: returns (weights, bias, bad_step).
    """
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t steps = order.shape[0]
    w_arr = np.zeros(d, dtype=np.float64)
    vw_arr = np.zeros(d, dtype=np.float64)
    cdef double[::1] w = w_arr
    cdef double[::1] vw = vw_arr
    cdef double b = 0.0, vb = 0.0
    cdef double z, p, g, lg, ez
    cdef Py_ssize_t s, j, i
    for s in range(steps):
        i = order[s]
        z = b
        for j in range(d):
            z += w[j] * X[i, j]
        if not isfinite(z):
            return w_arr, b, s
        if z >= 0.0:
            p = 1.0 / (1.0 + exp(-z))
        else:
            ez = exp(z)
            p = ez / (1.0 + ez)
        g = p - y[i]
        lg = lr * g
        for j in range(d):
            vw[j] = momentum * vw[j] - lg * X[i, j]
            w[j] += vw[j]
        vb = momentum * vb - lg
        b += vb
    return w_arr, b, -1


def ucb_scores(double[:, ::1] a_inv, double[::1] theta, double[:, ::1] Z,
               double alpha):
    """Upper-confidence scores ``Z theta + alpha * sqrt(diag(Z a_inv Z^T))``."""
    cdef Py_ssize_t m = Z.shape[0]
    cdef Py_ssize_t k = Z.shape[1]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double mean, quad, row
    cdef Py_ssize_t i, j, l
    for i in range(m):
        mean = 0.0
        for j in range(k):
            mean += Z[i, j] * theta[j]
        quad = 0.0
        for j in range(k):
            row = 0.0
            for l in range(k):
                row += a_inv[j, l] * Z[i, l]
            quad += Z[i, j] * row
        if quad < 0.0:
            quad = 0.0
        out[i] = mean + alpha * sqrt(quad)
    return out_arr
