"""Pure-Python/numpy implementations of the hot numeric loops.

These mirror the compiled kernels operation for operation so both backends
produce the same trajectories (per-example SGD uses plain float arithmetic
in the same accumulation order as the C code).
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "pure"


def sgd_logistic(
    X: np.ndarray,
    y: np.ndarray,
    order: np.ndarray,
    lr: float,
    momentum: float,
) -> tuple[np.ndarray, float, int]:
    """Per-example SGD on logistic loss with classical momentum.

    ``order`` is the full visit sequence (all epochs, already shuffled);
    weights and bias start at zero.  Returns ``(weights, bias, bad_step)``
    where ``bad_step`` is the index of the first step with a non-finite
    logit, or -1 if training stayed finite.
    """
    n, d = X.shape
    w = [0.0] * d
    vw = [0.0] * d
    b = 0.0
    vb = 0.0
    rows = X.tolist()
    ys = y.tolist()
    for step, i in enumerate(order.tolist()):
        xi = rows[i]
        z = b
        for j in range(d):
            z += w[j] * xi[j]
        if not math.isfinite(z):
            return np.asarray(w), b, step
        if z >= 0.0:
            p = 1.0 / (1.0 + math.exp(-z))
        else:
            ez = math.exp(z)
            p = ez / (1.0 + ez)
        g = p - ys[i]
        lg = lr * g
        for j in range(d):
            vw[j] = momentum * vw[j] - lg * xi[j]
            w[j] += vw[j]
        vb = momentum * vb - lg
        b += vb
    return np.asarray(w), b, -1


def ucb_scores(
    a_inv: np.ndarray,
    theta: np.ndarray,
    Z: np.ndarray,
    alpha: float,
) -> np.ndarray:
    """Upper-confidence scores ``Z theta + alpha * sqrt(diag(Z a_inv Z^T))``."""
    mean = Z @ theta
    quad = np.einsum("ij,jk,ik->i", Z, a_inv, Z)
    return mean + alpha * np.sqrt(np.maximum(quad, 0.0))
