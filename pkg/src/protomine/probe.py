"""Linear softmax probe trained by deterministic full-batch gradient steps.

Class handling is positional here: a probe over ``num_classes`` outputs
takes labels in ``0..num_classes-1``. Callers that work with 1-based
class labels shift them down before calling in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyBatchError,
    InvalidConfigError,
    LabelOutOfRangeError,
    LengthMismatchError,
)
from .numerics import as_matrix, as_vector


@dataclass(frozen=True)
class ProbeClassifier:
    """Affine map plus softmax; weights (num_classes, dim), biases (num_classes,)."""

    weights: np.ndarray
    biases: np.ndarray
    learning_rate: float

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]


def init_probe(num_classes: int, dim: int, learning_rate: float) -> ProbeClassifier:
    """Zero-initialized probe; its first forward pass is uniform."""
    if num_classes < 2:
        raise InvalidConfigError("need at least two classes")
    if dim < 1:
        raise InvalidConfigError("need dim >= 1")
    if learning_rate <= 0.0:
        raise InvalidConfigError("learning rate must be positive")
    return ProbeClassifier(
        weights=np.zeros((num_classes, dim)),
        biases=np.zeros(num_classes),
        learning_rate=learning_rate,
    )


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def forward_probs(probe: ProbeClassifier, feature) -> np.ndarray:
    """Class probabilities for one feature; positive entries summing to one."""
    v = as_vector(feature)
    if v.shape[0] != probe.dim:
        raise DimensionMismatchError(f"feature dim {v.shape[0]} vs probe dim {probe.dim}")
    return _softmax_rows(probe.weights @ v + probe.biases)


def cross_entropy(probs, label: int) -> float:
    """Negative log probability of the given class index."""
    p = as_vector(probs)
    if not 0 <= label < p.shape[0]:
        raise LabelOutOfRangeError(f"label {label} outside 0..{p.shape[0] - 1}")
    return float(-np.log(p[label]))


def _validate_batch(probe: ProbeClassifier, features, labels):
    feats = as_matrix(features)
    if feats.shape[0] == 0:
        raise EmptyBatchError("empty training batch")
    if feats.shape[1] != probe.dim:
        raise DimensionMismatchError(f"features dim {feats.shape[1]} vs probe dim {probe.dim}")
    labs = np.asarray(labels, dtype=np.int64)
    if labs.ndim != 1 or labs.shape[0] != feats.shape[0]:
        raise LengthMismatchError(f"{feats.shape[0]} features vs {labs.shape} labels")
    if labs.min() < 0 or labs.max() >= probe.num_classes:
        raise LabelOutOfRangeError(f"labels must lie in 0..{probe.num_classes - 1}")
    return feats, labs


def batch_loss(probe: ProbeClassifier, features, labels, weight: float = 1.0) -> float:
    """weight times the mean cross-entropy of the batch."""
    feats, labs = _validate_batch(probe, features, labels)
    probs = _softmax_rows(feats @ probe.weights.T + probe.biases)
    return float(weight * np.mean(-np.log(probs[np.arange(len(labs)), labs])))


def sgd_step(probe: ProbeClassifier, features, labels, weight: float = 1.0) -> ProbeClassifier:
    """One full-batch gradient step on weight times the mean cross-entropy.

    The softmax cross-entropy gradient in logit space is ``probs`` with
    one subtracted at the true class; parameters move against the mean of
    its pullbacks, scaled by the probe's learning rate.
    """
    feats, labs = _validate_batch(probe, features, labels)
    n = feats.shape[0]
    probs = _softmax_rows(feats @ probe.weights.T + probe.biases)
    grad_logits = probs
    grad_logits[np.arange(n), labs] -= 1.0
    grad_w = weight * (grad_logits.T @ feats) / n
    grad_b = weight * grad_logits.mean(axis=0)
    return ProbeClassifier(
        weights=probe.weights - probe.learning_rate * grad_w,
        biases=probe.biases - probe.learning_rate * grad_b,
        learning_rate=probe.learning_rate,
    )


def predict_labels(probe: ProbeClassifier, features) -> np.ndarray:
    """Argmax class index per feature, ties to the lowest index."""
    feats = as_matrix(features)
    if feats.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    if feats.shape[1] != probe.dim:
        raise DimensionMismatchError(f"features dim {feats.shape[1]} vs probe dim {probe.dim}")
    logits = feats @ probe.weights.T + probe.biases
    return logits.argmax(axis=1)
