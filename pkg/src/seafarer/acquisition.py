"""Informativeness scores for unlabeled items.

The default score is the exponential of the prediction entropy,
``exp(gamma * H(p1))`` with natural-log entropy, which magnifies
differences between near-uniform predictions.  The plain binary uncertainty
variants (entropy, least confidence, margin) are rank-equivalent to it for
exact argmax selection and are provided for comparison runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

KINDS = ("exp_entropy", "entropy", "least_confidence", "margin")

_PROBA_TOL = 1e-9


@dataclass
class AcquisitionConfig:
    kind: str = "exp_entropy"
    gamma: float = 4.0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown acquisition kind {self.kind!r}; expected one of {KINDS}")
        if not np.isfinite(self.gamma):
            raise ValueError(f"gamma must be finite, got {self.gamma}")


def binary_entropy(p1: np.ndarray) -> np.ndarray:
    """Natural-log entropy of (1-p, p) with the 0*ln(0) = 0 convention."""
    p1 = np.asarray(p1, dtype=np.float64)
    p0 = 1.0 - p1
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(p1 > 0, p1 * np.log(p1), 0.0)
        t0 = np.where(p0 > 0, p0 * np.log(p0), 0.0)
    return -(t1 + t0)


def score_batch(cfg: AcquisitionConfig, p1: np.ndarray) -> np.ndarray:
    """Vectorized scores for an array of positive-class probabilities."""
    p1 = np.asarray(p1, dtype=np.float64)
    if cfg.kind == "exp_entropy":
        return np.exp(cfg.gamma * binary_entropy(p1))
    if cfg.kind == "entropy":
        return binary_entropy(p1)
    if cfg.kind == "least_confidence":
        return 1.0 - np.maximum(p1, 1.0 - p1)
    # margin: negated absolute probability gap, so bigger is more uncertain
    return -np.abs(p1 - (1.0 - p1))


def score(cfg: AcquisitionConfig, proba: tuple[float, float]) -> float:
    """Score one (p0, p1) pair; raises on an invalid probability pair."""
    p0, p1 = proba
    if not (np.isfinite(p0) and np.isfinite(p1)):
        raise ValueError(f"non-finite probability pair ({p0}, {p1})")
    if not (0.0 <= p0 <= 1.0 and 0.0 <= p1 <= 1.0) or abs(p0 + p1 - 1.0) > _PROBA_TOL:
        raise ValueError(f"invalid probability pair ({p0}, {p1})")
    return float(score_batch(cfg, np.asarray([p1]))[0])


def argmax_item(
    cfg: AcquisitionConfig,
    model,
    candidates: Sequence,
    exclude: Iterable[str] = (),
):
    """Highest-scoring non-excluded candidate; ties go to the smallest id.

    Returns ``(item, score)``.  Raises ValueError when every candidate is
    excluded.
    """
    exclude = set(exclude)
    pool = [it for it in candidates if it.id not in exclude]
    if not pool:
        raise ValueError("all candidates are excluded")
    X = np.stack([it.features for it in pool])
    scores = score_batch(cfg, model.predict_proba_batch(X))
    best = scores.max()
    idx = min(
        (i for i in range(len(pool)) if scores[i] == best),
        key=lambda i: pool[i].id,
    )
    return pool[idx], float(scores[idx])
