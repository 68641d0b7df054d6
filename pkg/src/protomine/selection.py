"""Mining novel-class candidates out of an unlabeled feature pool.

Each base prototype is paired with the prototype farthest from it. A
query feature is scored against the pair by comparing its offsets from
two concentric shells: with d the prototype pair distance, the score is

    |(dist(v, anchor) - gamma*d)| / d  -  |(dist(v, partner) - gamma*d)| / d

which is negative when the query hugs the anchor's shell more tightly
than the partner's, and antisymmetric under swapping the pair. The
per-query minimum over all anchor rows ranks the pool; the k smallest
scores are the novel candidates that feed the unified novel memory slot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bank import MemoryBank, _with_novel_aux, momentum_blend
from .errors import (
    DegeneratePairError,
    DimensionMismatchError,
    EmptyBatchError,
    EmptySelectionError,
    IndexOutOfRangeError,
    KTooLargeError,
)
from .numerics import NORM_FLOOR, as_matrix, as_vector, euclidean_distance, mean_vector, std_vector

DEFAULT_GAMMA = 0.65
DEFAULT_TOP_K = 5


@dataclass(frozen=True)
class CandidateScores:
    """Shell-contrast scores of a feature pool against every prototype pair.

    scores:      shape (C, n); row c holds the pool's scores for anchor c
    partner_of:  shape (C,); partner_of[c] is the row index of the
                 prototype farthest from prototype c
    best_scores: shape (n,); column-wise minimum of scores
    """

    scores: np.ndarray
    partner_of: np.ndarray
    best_scores: np.ndarray


@dataclass(frozen=True)
class Selection:
    """Indices into the scored pool (strictly increasing) and their features."""

    indices: np.ndarray
    features: np.ndarray


def farthest_partner(prototypes, row: int) -> int:
    """Row index of the prototype farthest (L2) from prototypes[row].

    Ties resolve to the lowest index. Depends only on the prototypes, not
    on any query.
    """
    protos = as_matrix(prototypes)
    n = protos.shape[0]
    if not 0 <= row < n:
        raise IndexOutOfRangeError(f"row {row} outside 0..{n - 1}")
    if n < 2:
        raise DegeneratePairError("need at least two prototypes to form a pair")
    dist = np.linalg.norm(protos - protos[row], axis=1)
    dist[row] = -np.inf
    return int(dist.argmax())


def shell_contrast(query, anchor, partner, gamma: float = DEFAULT_GAMMA) -> float:
    """Relative shell offset around the anchor minus the same around the partner."""
    v, ma, mb = as_vector(query), as_vector(anchor), as_vector(partner)
    if not v.shape == ma.shape == mb.shape:
        raise DimensionMismatchError(f"{v.shape} vs {ma.shape} vs {mb.shape}")
    d = euclidean_distance(ma, mb)
    if d < NORM_FLOOR:
        raise DegeneratePairError("anchor and partner coincide; no shell scale")
    return (abs(euclidean_distance(v, ma) - gamma * d)
            - abs(euclidean_distance(v, mb) - gamma * d)) / d


def build_candidate_scores(features, bank: MemoryBank, gamma: float = DEFAULT_GAMMA) -> CandidateScores:
    """Score every pool feature against every base prototype's shell pair."""
    pool = as_matrix(features)
    if pool.shape[0] == 0:
        raise EmptyBatchError("cannot score an empty pool")
    if pool.shape[1] != bank.dim:
        raise DimensionMismatchError(f"pool dim {pool.shape[1]} vs bank dim {bank.dim}")
    c = bank.num_base_classes
    partner_of = np.array([farthest_partner(bank.base_prototypes, i) for i in range(c)])
    scores = np.empty((c, pool.shape[0]), dtype=np.float64)
    for i in range(c):
        ma = bank.base_prototypes[i]
        mb = bank.base_prototypes[partner_of[i]]
        d = float(np.linalg.norm(ma - mb))
        if d < NORM_FLOOR:
            raise DegeneratePairError(f"prototypes {i} and {partner_of[i]} coincide")
        da = np.linalg.norm(pool - ma, axis=1)
        db = np.linalg.norm(pool - mb, axis=1)
        scores[i] = (np.abs(da - gamma * d) - np.abs(db - gamma * d)) / d
    return CandidateScores(scores=scores, partner_of=partner_of, best_scores=scores.min(axis=0))


def select_topk(candidates: CandidateScores, features, k: int = DEFAULT_TOP_K) -> Selection:
    """Pick the k pool entries with the smallest best scores.

    Score ties go to the lower pool index; the returned indices are
    sorted ascending regardless of score order.
    """
    pool = as_matrix(features)
    n = candidates.best_scores.shape[0]
    if pool.shape[0] != n:
        raise DimensionMismatchError(f"pool has {pool.shape[0]} rows, scores have {n}")
    if k < 1:
        raise KTooLargeError("k must be at least 1")
    if k > n:
        raise KTooLargeError(f"k={k} exceeds pool size {n}")
    order = np.argsort(candidates.best_scores, kind="stable")[:k]
    indices = np.sort(order)
    return Selection(indices=indices, features=pool[indices])


def update_novel_memory(bank: MemoryBank, selection: Selection) -> MemoryBank:
    """Blend the novel slot toward the selected candidates.

    The prototype moves toward the selection mean; the disparity moves
    toward the selection spread when at least two candidates were
    selected, otherwise it is left alone. The aux pair is rebuilt either
    way.
    """
    feats = selection.features
    if feats.shape[0] == 0:
        raise EmptySelectionError("no candidates selected")
    beta = bank.momentum
    new_proto = momentum_blend(bank.novel_prototype, mean_vector(feats), beta)
    if feats.shape[0] >= 2:
        new_disp = momentum_blend(bank.novel_disparity, std_vector(feats), beta)
    else:
        new_disp = bank.novel_disparity
    return _with_novel_aux(bank, new_proto, new_disp)
