"""Probabilistic binary classifier over item features.

Logistic regression retrained from scratch: per-example SGD with classical
momentum, seeded shuffle order per epoch, zero-initialized weights.  The
probability interface (``predict_proba``) is the only thing downstream code
depends on, so any probabilistic classifier could be swapped in here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from seafarer import kernels

LOSS_CLAMP = 1e-7


class TrainingError(RuntimeError):
    """Raised when training cannot proceed (bad ids, non-finite loss)."""


@dataclass
class TrainConfig:
    learning_rate: float = 0.0001
    momentum: float = 0.9
    epochs: int = 100
    seed: int = 0
    l2_normalize_features: bool = True

    def __post_init__(self) -> None:
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0 <= self.momentum < 1:
            raise ValueError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")


def _normalize_rows(X: np.ndarray) -> np.ndarray:
    """L2-normalize each row; zero rows pass through unchanged."""
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    safe = np.where(norms == 0, 1.0, norms)
    return X / safe


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # Branch on sign to avoid overflow in exp for large |z|.
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class BinaryClassifier:
    """Trained logistic model; immutable and safe for concurrent predicts."""

    weights: np.ndarray
    bias: float
    normalized: bool = True
    trained_on_count: int = 0

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        if not np.all(np.isfinite(w)) or not np.isfinite(self.bias):
            raise TrainingError("classifier weights must be finite")
        w.flags.writeable = False
        self.weights = w

    @property
    def d(self) -> int:
        return int(self.weights.shape[0])

    def predict_proba_batch(self, X: np.ndarray) -> np.ndarray:
        """Positive-class probabilities for an (n, d) feature matrix."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise ValueError(f"expected (n, {self.d}) features, got {X.shape}")
        if self.normalized:
            X = _normalize_rows(X)
        return _sigmoid(X @ self.weights + self.bias)

    def predict_proba(self, features: np.ndarray) -> tuple[float, float]:
        """Return (p0, p1) with p0 + p1 = 1 exactly."""
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 1 or features.shape[0] != self.d:
            raise ValueError(f"expected a {self.d}-vector, got shape {features.shape}")
        p1 = float(self.predict_proba_batch(features[None, :])[0])
        return 1.0 - p1, p1

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "normalized": self.normalized,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "BinaryClassifier":
        return cls(
            weights=np.asarray(obj["weights"], dtype=np.float64),
            bias=float(obj["bias"]),
            normalized=bool(obj["normalized"]),
        )


FeatureResolver = Callable[[str], np.ndarray]


def _resolver(source) -> FeatureResolver:
    """Accept a Corpus, a mapping, or a callable as the id -> features source."""
    if hasattr(source, "tag_index"):  # Corpus
        return lambda item_id: source.get(item_id).features
    if isinstance(source, Mapping):
        return lambda item_id: source[item_id]
    if callable(source):
        return source
    raise TypeError(f"cannot resolve features from {type(source)!r}")


def train(labeled, features, cfg: TrainConfig) -> BinaryClassifier:
    """Train from scratch on the labeled set; deterministic given (labeled, cfg).

    ``labeled`` is anything with ``entries`` (or an iterable) of
    ``(item_id, label)`` pairs; ``features`` resolves ids to vectors
    (a Corpus, a mapping, or a callable).
    """
    entries = list(getattr(labeled, "entries", labeled))
    if not entries:
        raise TrainingError("labeled set is empty")
    resolve = _resolver(features)
    rows = []
    for item_id, label in entries:
        try:
            rows.append(np.asarray(resolve(item_id), dtype=np.float64))
        except KeyError:
            raise TrainingError(f"cannot resolve features for item {item_id!r}") from None
    X = np.ascontiguousarray(np.stack(rows))
    y = np.asarray([float(label) for _, label in entries])
    if cfg.l2_normalize_features:
        X = np.ascontiguousarray(_normalize_rows(X))

    n = X.shape[0]
    rng = np.random.default_rng(cfg.seed)
    order = np.concatenate([rng.permutation(n) for _ in range(cfg.epochs)])
    order = np.ascontiguousarray(order, dtype=np.int64)

    w, b, bad_step = kernels.sgd_logistic(X, y, order, cfg.learning_rate, cfg.momentum)
    if bad_step >= 0:
        raise TrainingError(f"non-finite loss at SGD step {bad_step}")
    return BinaryClassifier(
        weights=w,
        bias=float(b),
        normalized=cfg.l2_normalize_features,
        trained_on_count=n,
    )


def logistic_loss(weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray) -> float:
    """Mean logistic loss; probabilities clamped to [1e-7, 1 - 1e-7] inside the log."""
    p = _sigmoid(np.asarray(X) @ np.asarray(weights) + bias)
    p = np.clip(p, LOSS_CLAMP, 1.0 - LOSS_CLAMP)
    y = np.asarray(y, dtype=np.float64)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def logistic_grad(
    weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray
) -> tuple[np.ndarray, float]:
    """Analytic gradient of the mean logistic loss w.r.t. (weights, bias)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    p = _sigmoid(X @ np.asarray(weights) + bias)
    resid = p - y
    gw = X.T @ resid / X.shape[0]
    gb = float(np.mean(resid))
    return gw, gb
