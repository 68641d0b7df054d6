"""Open-set evaluation: confusion counts and the metrics derived from them.

Truth labels arrive in the simulator's convention (0 background, 1..C
base, C+2.. individual novel); predictions live in 1..C+1 where C+1 is
the unified novel class. Individual novel truths collapse onto C+1
before counting, and the collapse is idempotent. A metric whose
denominator is empty is absent (None), never reported as zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyInputError,
    IndexOutOfRangeError,
    LabelOutOfRangeError,
    LengthMismatchError,
    UndefinedMetricError,
)


@dataclass(frozen=True)
class MetricReport:
    """One evaluation round's metrics; absent values are None."""

    base_accuracy: float | None
    novel_recall: float | None
    wilderness_impact: float | None
    aose: int
    per_class_precision: dict[int, float | None] = field(default_factory=dict)
    per_class_recall: dict[int, float | None] = field(default_factory=dict)
    selection_precision: float | None = None
    selection_recall: float | None = None


def _validated(predictions, truths, num_base_classes: int):
    preds = np.asarray(predictions, dtype=np.int64)
    trues = np.asarray(truths, dtype=np.int64)
    if preds.ndim != 1 or trues.ndim != 1 or preds.shape != trues.shape:
        raise LengthMismatchError(f"{preds.shape} predictions vs {trues.shape} truths")
    if preds.size == 0:
        raise EmptyInputError("no samples to evaluate")
    c = num_base_classes
    if preds.min() < 1 or preds.max() > c + 1:
        raise LabelOutOfRangeError(f"predictions must lie in 1..{c + 1}")
    if trues.min() < 0:
        raise LabelOutOfRangeError("negative truth label")
    return preds, trues


def collapse_novel(truths, num_base_classes: int) -> np.ndarray:
    """Map every individual novel truth (>= C+1) onto the unified label C+1."""
    trues = np.asarray(truths, dtype=np.int64)
    if trues.size and trues.min() < 0:
        raise LabelOutOfRangeError("negative truth label")
    return np.where(trues >= num_base_classes + 1, num_base_classes + 1, trues)


def confusion(predictions, truths, num_base_classes: int) -> np.ndarray:
    """(C+2, C+1) count table: row = collapsed truth 0..C+1, column = prediction-1."""
    preds = np.asarray(predictions, dtype=np.int64)
    trues = np.asarray(truths, dtype=np.int64)
    if preds.ndim != 1 or trues.ndim != 1 or preds.shape != trues.shape:
        raise LengthMismatchError(f"{preds.shape} predictions vs {trues.shape} truths")
    c = num_base_classes
    if preds.size:
        if preds.min() < 1 or preds.max() > c + 1:
            raise LabelOutOfRangeError(f"predictions must lie in 1..{c + 1}")
    collapsed = collapse_novel(trues, c)
    table = np.zeros((c + 2, c + 1), dtype=np.int64)
    np.add.at(table, (collapsed, preds - 1), 1)
    return table


def wilderness_impact(predictions, truths, num_base_classes: int) -> float:
    """Closed-set base precision over open-set base precision, minus one.

    The closed set is the base-truth samples; the open set adds the
    novel-truth samples. Background-truth samples belong to neither.
    Precision counts only base-class predictions. Raises
    UndefinedMetricError when either precision has no denominator or the
    open-set precision is zero.
    """
    preds = np.asarray(predictions, dtype=np.int64)
    trues = collapse_novel(np.asarray(truths, dtype=np.int64), num_base_classes)
    if preds.shape != trues.shape:
        raise LengthMismatchError(f"{preds.shape} predictions vs {trues.shape} truths")
    c = num_base_classes
    base_truth = (trues >= 1) & (trues <= c)
    open_set = trues >= 1
    base_pred = (preds >= 1) & (preds <= c)

    closed_hits = int(np.sum(base_truth & base_pred & (preds == trues)))
    closed_total = int(np.sum(base_truth & base_pred))
    open_hits = int(np.sum(open_set & base_pred & (preds == trues)))
    open_total = int(np.sum(open_set & base_pred))

    if closed_total == 0 or open_total == 0:
        raise UndefinedMetricError("no base-class predictions in a subset")
    p_closed = closed_hits / closed_total
    p_open = open_hits / open_total
    if p_open == 0.0:
        raise UndefinedMetricError("open-set precision is zero")
    return p_closed / p_open - 1.0


def aose(predictions, truths, num_base_classes: int) -> int:
    """Count of novel-truth samples predicted as some base class."""
    preds = np.asarray(predictions, dtype=np.int64)
    trues = collapse_novel(np.asarray(truths, dtype=np.int64), num_base_classes)
    if preds.shape != trues.shape:
        raise LengthMismatchError(f"{preds.shape} predictions vs {trues.shape} truths")
    c = num_base_classes
    return int(np.sum((trues == c + 1) & (preds >= 1) & (preds <= c)))


def selection_metrics(selected_indices, pool_truths, num_base_classes: int):
    """Precision/recall of a candidate selection against hidden pool labels.

    A selected entry is a hit when its truth is an individual novel label
    (>= C+2). Precision is absent for an empty selection; recall is
    absent when the pool holds no novel entries.
    """
    idx = np.asarray(selected_indices, dtype=np.int64)
    trues = np.asarray(pool_truths, dtype=np.int64)
    if idx.ndim != 1 or trues.ndim != 1:
        raise LengthMismatchError("indices and truths must be 1-D")
    if idx.size and (idx.min() < 0 or idx.max() >= trues.size):
        raise IndexOutOfRangeError("selected index outside the pool")
    novel_mask = trues >= num_base_classes + 2
    total_novel = int(novel_mask.sum())
    hits = int(novel_mask[idx].sum()) if idx.size else 0
    precision = hits / idx.size if idx.size else None
    recall = hits / total_novel if total_novel else None
    return precision, recall


def evaluate(predictions, truths, num_base_classes: int,
             selected_indices=None, pool_truths=None) -> MetricReport:
    """Assemble a MetricReport from one prediction round.

    Selection metrics are filled only when both the selection and its
    pool truths are supplied.
    """
    preds, trues_raw = _validated(predictions, truths, num_base_classes)
    c = num_base_classes
    trues = collapse_novel(trues_raw, c)

    base_truth = (trues >= 1) & (trues <= c)
    novel_truth = trues == c + 1
    base_acc = (float(np.mean(preds[base_truth] == trues[base_truth]))
                if base_truth.any() else None)
    nov_recall = (float(np.mean(preds[novel_truth] == c + 1))
                  if novel_truth.any() else None)
    try:
        wi = wilderness_impact(preds, trues, c)
    except UndefinedMetricError:
        wi = None

    table = confusion(preds, trues_raw, c)
    per_prec: dict[int, float | None] = {}
    per_rec: dict[int, float | None] = {}
    for label in range(1, c + 2):
        col = int(table[:, label - 1].sum())
        row = int(table[label, :].sum())
        correct = int(table[label, label - 1])
        per_prec[label] = correct / col if col else None
        per_rec[label] = correct / row if row else None

    sel_p = sel_r = None
    if selected_indices is not None and pool_truths is not None:
        sel_p, sel_r = selection_metrics(selected_indices, pool_truths, c)

    return MetricReport(
        base_accuracy=base_acc,
        novel_recall=nov_recall,
        wilderness_impact=wi,
        aose=aose(preds, trues_raw, c),
        per_class_precision=per_prec,
        per_class_recall=per_rec,
        selection_precision=sel_p,
        selection_recall=sel_r,
    )


# --- confusion-table recomputations, used to cross-check the streaming paths ---

def base_accuracy_from_confusion(table: np.ndarray, num_base_classes: int) -> float | None:
    c = num_base_classes
    total = int(table[1:c + 1, :].sum())
    hits = int(sum(table[l, l - 1] for l in range(1, c + 1)))
    return hits / total if total else None


def novel_recall_from_confusion(table: np.ndarray, num_base_classes: int) -> float | None:
    c = num_base_classes
    row = int(table[c + 1, :].sum())
    return int(table[c + 1, c]) / row if row else None


def aose_from_confusion(table: np.ndarray, num_base_classes: int) -> int:
    c = num_base_classes
    return int(table[c + 1, 0:c].sum())


def wilderness_impact_from_confusion(table: np.ndarray, num_base_classes: int) -> float | None:
    c = num_base_classes
    closed_total = int(table[1:c + 1, 0:c].sum())
    closed_hits = int(sum(table[l, l - 1] for l in range(1, c + 1)))
    open_total = closed_total + int(table[c + 1, 0:c].sum())
    open_hits = closed_hits  # novel truths can never match a base prediction
    if closed_total == 0 or open_total == 0 or open_hits == 0:
        return None
    return (closed_hits / closed_total) / (open_hits / open_total) - 1.0
