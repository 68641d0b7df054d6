"""Clustering-backed prototype memory.

The bank keeps, per base class, a prototype vector, a pair of auxiliary
vectors (sub-cluster centers from the most recent update), and a
disparity vector (a smoothed coordinate-wise spread). A single unified
novel-class slot mirrors the same layout; its auxiliary pair is always
recomputed as prototype +/- disparity, which is the bank's one standing
invariant.

Updates never mutate: every operation returns a new bank. Smoothing uses
a cosine-gated momentum step: the blend weight is ``momentum`` times the
cosine similarity between the incoming and stored vector, applied as
``old + w * (new - old)``. That form is algebraically the convex
combination ``w*new + (1-w)*old`` but keeps ``blend(x, x) == x`` bitwise.
A negative cosine is used as-is, moving the stored vector away from the
incoming one.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from .clustering import cluster_of_point, kmeans
from .errors import (
    ClassIndexOutOfRangeError,
    DimensionMismatchError,
    InvalidConfigError,
    MalformedSnapshotError,
    VersionMismatchError,
)
from .numerics import as_matrix, as_vector, cosine_similarity, mean_vector, std_vector

SNAPSHOT_VERSION = "v1"

_ARRAY_FIELDS_2D = ("base_prototypes", "base_aux_plus", "base_aux_minus", "base_disparity")
_ARRAY_FIELDS_1D = ("novel_prototype", "novel_aux_plus", "novel_aux_minus", "novel_disparity")


@dataclass(frozen=True)
class MemoryBank:
    """Immutable prototype memory for C base classes plus one novel slot."""

    num_base_classes: int
    dim: int
    momentum: float
    base_prototypes: np.ndarray
    base_aux_plus: np.ndarray
    base_aux_minus: np.ndarray
    base_disparity: np.ndarray
    novel_prototype: np.ndarray
    novel_aux_plus: np.ndarray
    novel_aux_minus: np.ndarray
    novel_disparity: np.ndarray


def momentum_blend(old, new, beta: float = 0.01) -> np.ndarray:
    """Move old toward new by beta times their cosine similarity."""
    vo, vn = as_vector(old), as_vector(new)
    if vo.shape != vn.shape:
        raise DimensionMismatchError(f"{vo.shape} vs {vn.shape}")
    w = beta * cosine_similarity(vn, vo)
    return vo + w * (vn - vo)


def _with_novel_aux(bank: MemoryBank, novel_prototype: np.ndarray,
                    novel_disparity: np.ndarray, **changes) -> MemoryBank:
    """Rebuild a bank keeping aux = prototype +/- disparity for the novel slot."""
    return dataclasses.replace(
        bank,
        novel_prototype=novel_prototype,
        novel_disparity=novel_disparity,
        novel_aux_plus=novel_prototype + novel_disparity,
        novel_aux_minus=novel_prototype - novel_disparity,
        **changes,
    )


def init_bank(num_base_classes: int, dim: int, seed: int, momentum: float = 0.01) -> MemoryBank:
    """Fresh bank with every stored vector drawn from a seeded standard normal.

    The novel auxiliary pair is derived from the drawn prototype and
    disparity rather than drawn itself, so the bank invariant holds from
    the start.
    """
    if num_base_classes < 2:
        raise InvalidConfigError("need at least two base classes")
    if dim < 2:
        raise InvalidConfigError("need dim >= 2")
    if not 0.0 < momentum <= 1.0:
        raise InvalidConfigError("momentum must be in (0, 1]")
    rng = np.random.default_rng(seed)
    base_prototypes = rng.standard_normal((num_base_classes, dim))
    base_aux_plus = rng.standard_normal((num_base_classes, dim))
    base_aux_minus = rng.standard_normal((num_base_classes, dim))
    base_disparity = rng.standard_normal((num_base_classes, dim))
    novel_prototype = rng.standard_normal(dim)
    novel_disparity = rng.standard_normal(dim)
    return MemoryBank(
        num_base_classes=num_base_classes,
        dim=dim,
        momentum=momentum,
        base_prototypes=base_prototypes,
        base_aux_plus=base_aux_plus,
        base_aux_minus=base_aux_minus,
        base_disparity=base_disparity,
        novel_prototype=novel_prototype,
        novel_aux_plus=novel_prototype + novel_disparity,
        novel_aux_minus=novel_prototype - novel_disparity,
        novel_disparity=novel_disparity,
    )


def update_base_class(bank: MemoryBank, class_index: int, matched_features, seed: int) -> MemoryBank:
    """Fold one class's matched features into its bank row.

    The prototype is appended to the features and the union is split into
    three clusters. The prototype blends toward the mean of the cluster
    that contains it; the two remaining cluster means replace the
    auxiliary pair (the one more cosine-aligned with the updated
    prototype becomes the plus side, ties to the lower cluster index).
    The disparity blends toward the population spread of the matched
    features alone.

    One matched feature skips clustering and blends the prototype toward
    that feature; zero matched features return the bank unchanged.
    """
    if not 1 <= class_index <= bank.num_base_classes:
        raise ClassIndexOutOfRangeError(
            f"class {class_index} outside 1..{bank.num_base_classes}")
    feats = as_matrix(matched_features) if len(matched_features) else np.empty((0, bank.dim))
    if feats.shape[0] and feats.shape[1] != bank.dim:
        raise DimensionMismatchError(f"features have dim {feats.shape[1]}, bank has {bank.dim}")

    row = class_index - 1
    if feats.shape[0] == 0:
        return bank

    beta = bank.momentum
    proto = bank.base_prototypes[row]

    if feats.shape[0] == 1:
        new_proto = momentum_blend(proto, feats[0], beta)
        base_prototypes = bank.base_prototypes.copy()
        base_prototypes[row] = new_proto
        return dataclasses.replace(bank, base_prototypes=base_prototypes)

    points = np.vstack([feats, proto[None, :]])
    clustering = kmeans(points, 3, seed)
    own = cluster_of_point(clustering, points.shape[0] - 1)
    new_proto = momentum_blend(proto, mean_vector(points[clustering.assignments == own]), beta)

    others = [j for j in range(3) if j != own]
    mean_a = mean_vector(points[clustering.assignments == others[0]])
    mean_b = mean_vector(points[clustering.assignments == others[1]])
    # >= sends a tie to the lower cluster index
    if cosine_similarity(mean_a, new_proto) >= cosine_similarity(mean_b, new_proto):
        aux_plus, aux_minus = mean_a, mean_b
    else:
        aux_plus, aux_minus = mean_b, mean_a

    new_disparity = momentum_blend(bank.base_disparity[row], std_vector(feats), beta)

    base_prototypes = bank.base_prototypes.copy()
    base_aux_plus = bank.base_aux_plus.copy()
    base_aux_minus = bank.base_aux_minus.copy()
    base_disparity = bank.base_disparity.copy()
    base_prototypes[row] = new_proto
    base_aux_plus[row] = aux_plus
    base_aux_minus[row] = aux_minus
    base_disparity[row] = new_disparity
    return dataclasses.replace(
        bank,
        base_prototypes=base_prototypes,
        base_aux_plus=base_aux_plus,
        base_aux_minus=base_aux_minus,
        base_disparity=base_disparity,
    )


def refresh_novel_from_base(bank: MemoryBank) -> MemoryBank:
    """Blend the novel slot toward the base rows' means and rebuild its aux pair."""
    beta = bank.momentum
    new_proto = momentum_blend(bank.novel_prototype, mean_vector(bank.base_prototypes), beta)
    new_disp = momentum_blend(bank.novel_disparity, mean_vector(bank.base_disparity), beta)
    return _with_novel_aux(bank, new_proto, new_disp)


def novel_slot_consistent(bank: MemoryBank, tol: float = 1e-12) -> bool:
    """True when the novel aux pair equals prototype +/- disparity within tol."""
    return bool(
        np.all(np.abs(bank.novel_aux_plus - (bank.novel_prototype + bank.novel_disparity)) <= tol)
        and np.all(np.abs(bank.novel_aux_minus - (bank.novel_prototype - bank.novel_disparity)) <= tol)
    )


def snapshot(bank: MemoryBank) -> bytes:
    """Serialize to versioned JSON; floats keep full round-trip precision."""
    doc = {
        "version": SNAPSHOT_VERSION,
        "num_base_classes": bank.num_base_classes,
        "dim": bank.dim,
        "momentum": bank.momentum,
    }
    for name in _ARRAY_FIELDS_2D + _ARRAY_FIELDS_1D:
        doc[name] = getattr(bank, name).tolist()
    return json.dumps(doc, sort_keys=True).encode("utf-8")


def load_snapshot(blob: bytes) -> MemoryBank:
    """Inverse of snapshot; bitwise round-trip."""
    try:
        doc = json.loads(blob.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedSnapshotError(f"undecodable snapshot: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedSnapshotError("snapshot is not an object")
    version = doc.get("version")
    if version != SNAPSHOT_VERSION:
        raise VersionMismatchError(f"unsupported snapshot version {version!r}")

    expected = {"version", "num_base_classes", "dim", "momentum",
                *_ARRAY_FIELDS_2D, *_ARRAY_FIELDS_1D}
    if set(doc) != expected:
        raise MalformedSnapshotError(
            f"unexpected snapshot fields: {sorted(set(doc) ^ expected)}")

    try:
        c = int(doc["num_base_classes"])
        dim = int(doc["dim"])
        momentum = float(doc["momentum"])
        arrays = {name: np.asarray(doc[name], dtype=np.float64)
                  for name in _ARRAY_FIELDS_2D + _ARRAY_FIELDS_1D}
    except (TypeError, ValueError) as exc:
        raise MalformedSnapshotError(f"bad field payload: {exc}") from exc

    for name in _ARRAY_FIELDS_2D:
        if arrays[name].shape != (c, dim):
            raise MalformedSnapshotError(f"{name} has shape {arrays[name].shape}, want {(c, dim)}")
    for name in _ARRAY_FIELDS_1D:
        if arrays[name].shape != (dim,):
            raise MalformedSnapshotError(f"{name} has shape {arrays[name].shape}, want {(dim,)}")
    for name, arr in arrays.items():
        if not np.all(np.isfinite(arr)):
            raise MalformedSnapshotError(f"{name} contains non-finite values")
    if c < 2 or dim < 2 or not 0.0 < momentum <= 1.0:
        raise MalformedSnapshotError("scalar fields out of range")

    return MemoryBank(num_base_classes=c, dim=dim, momentum=momentum, **arrays)
