"""Label assignment for unlabeled target features via auxiliary pairs.

Every class row (the C base classes plus the unified novel slot, label
C+1) is summarized by its auxiliary pair: the midpoint anchors the row,
the pair separation sets its scale. A feature's score for a row is its
distance to the midpoint divided by the separation, so smaller means a
better fit and rows with wide pairs are more permissive. Each feature
takes the label of its smallest-score row, ties to the lowest label.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .bank import MemoryBank, _with_novel_aux, momentum_blend
from .errors import (
    DimensionMismatchError,
    EmptyBatchError,
    LabelOutOfRangeError,
    LengthMismatchError,
)
from .numerics import as_matrix, mean_vector

DEFAULT_FG_THRESHOLD = 0.5
_SEPARATION_FLOOR = 1e-12


@dataclass(frozen=True)
class AssignmentScores:
    """Per-row fit scores and the resulting labels.

    scores:          shape (C+1, n); row index r scores label r+1
    assigned_labels: shape (n,); values in 1..C+1
    """

    scores: np.ndarray
    assigned_labels: np.ndarray


def filter_foreground(features, fg_scores, threshold: float = DEFAULT_FG_THRESHOLD):
    """Keep features whose score strictly exceeds the threshold.

    Returns (kept_features, kept_indices); kept_indices are ascending
    positions into the original batch.
    """
    feats = as_matrix(features)
    scores = np.asarray(fg_scores, dtype=np.float64)
    if scores.ndim != 1 or scores.shape[0] != feats.shape[0]:
        raise LengthMismatchError(
            f"{feats.shape[0]} features vs {scores.shape} scores")
    kept = np.flatnonzero(scores > threshold)
    return feats[kept], kept


def build_assignment_scores(features, bank: MemoryBank) -> AssignmentScores:
    """Score foreground features against every class row's auxiliary pair."""
    feats = as_matrix(features)
    if feats.shape[0] == 0:
        raise EmptyBatchError("cannot assign an empty batch")
    if feats.shape[1] != bank.dim:
        raise DimensionMismatchError(f"features dim {feats.shape[1]} vs bank dim {bank.dim}")
    aux_plus = np.vstack([bank.base_aux_plus, bank.novel_aux_plus[None, :]])
    aux_minus = np.vstack([bank.base_aux_minus, bank.novel_aux_minus[None, :]])
    mids = (aux_plus + aux_minus) / 2.0
    separations = np.maximum(np.linalg.norm(aux_plus - aux_minus, axis=1), _SEPARATION_FLOOR)
    dist = np.linalg.norm(feats[:, None, :] - mids[None, :, :], axis=2)
    scores = (dist / separations[None, :]).T
    # argmin keeps the first minimum, so label ties resolve low
    assigned = scores.argmin(axis=0) + 1
    return AssignmentScores(scores=scores, assigned_labels=assigned)


def update_prototypes_from_target(bank: MemoryBank, features, assigned_labels) -> MemoryBank:
    """Blend each row's prototype toward the mean of the features it was assigned.

    Classes with no assigned features keep their prototype. A novel-slot
    update rebuilds the novel aux pair from the unchanged disparity. The
    scores in the assignment are invariant to swapping a row's aux pair,
    and so is this update.
    """
    feats = as_matrix(features)
    labels = np.asarray(assigned_labels, dtype=np.int64)
    if labels.ndim != 1 or labels.shape[0] != feats.shape[0]:
        raise LengthMismatchError(f"{feats.shape[0]} features vs {labels.shape} labels")
    if feats.shape[0] and feats.shape[1] != bank.dim:
        raise DimensionMismatchError(f"features dim {feats.shape[1]} vs bank dim {bank.dim}")
    c = bank.num_base_classes
    if labels.size and (labels.min() < 1 or labels.max() > c + 1):
        raise LabelOutOfRangeError(f"labels must lie in 1..{c + 1}")

    beta = bank.momentum
    base_prototypes = bank.base_prototypes.copy()
    for label in range(1, c + 1):
        chosen = feats[labels == label]
        if chosen.shape[0] == 0:
            continue
        base_prototypes[label - 1] = momentum_blend(
            base_prototypes[label - 1], mean_vector(chosen), beta)

    out = dataclasses.replace(bank, base_prototypes=base_prototypes)
    chosen = feats[labels == c + 1]
    if chosen.shape[0]:
        new_proto = momentum_blend(bank.novel_prototype, mean_vector(chosen), beta)
        out = _with_novel_aux(out, new_proto, bank.novel_disparity)
    return out
