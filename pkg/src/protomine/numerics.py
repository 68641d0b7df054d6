"""Deterministic vector primitives shared by every other module.

All functions accept array-likes, compute in float64, and are pure.
Aggregates use exact (correctly rounded) per-coordinate summation so the
result is bitwise invariant under permutation of the inputs.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyInputError,
    TooFewSamplesError,
    ZeroNormError,
)

NORM_FLOOR = 1e-12


def as_vector(x) -> np.ndarray:
    """Coerce to a 1-D float64 array."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatchError(f"expected a 1-D vector, got shape {v.shape}")
    return v


def as_matrix(vectors) -> np.ndarray:
    """Coerce a sequence of equal-length vectors to an (n, dim) float64 array."""
    m = np.asarray(vectors, dtype=np.float64)
    if m.ndim == 1:
        # a bare list of scalars is ambiguous; require explicit vectors
        raise DimensionMismatchError("expected a sequence of vectors, got a flat array")
    if m.ndim != 2:
        raise DimensionMismatchError(f"expected 2-D input, got shape {m.shape}")
    return m


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between a and b, clamped to [-1, 1]."""
    va, vb = as_vector(a), as_vector(b)
    if va.shape != vb.shape:
        raise DimensionMismatchError(f"{va.shape} vs {vb.shape}")
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na < NORM_FLOOR or nb < NORM_FLOOR:
        raise ZeroNormError("cosine undefined for (near-)zero-norm input")
    return float(np.clip(float(va @ vb) / (na * nb), -1.0, 1.0))


def euclidean_distance(a, b) -> float:
    """L2 distance between two vectors of equal length."""
    va, vb = as_vector(a), as_vector(b)
    if va.shape != vb.shape:
        raise DimensionMismatchError(f"{va.shape} vs {vb.shape}")
    return float(np.linalg.norm(va - vb))


def mean_vector(vectors) -> np.ndarray:
    """Coordinate-wise mean, exact-summed so input order cannot change the bits."""
    m = as_matrix(vectors)
    if m.shape[0] == 0:
        raise EmptyInputError("mean of zero vectors")
    n = m.shape[0]
    return np.array([math.fsum(col) / n for col in m.T], dtype=np.float64)


def std_vector(vectors) -> np.ndarray:
    """Coordinate-wise population standard deviation (denominator n)."""
    m = as_matrix(vectors)
    if m.shape[0] < 2:
        raise TooFewSamplesError("spread needs at least two samples")
    n = m.shape[0]
    mu = mean_vector(m)
    out = np.empty(m.shape[1], dtype=np.float64)
    for j in range(m.shape[1]):
        out[j] = math.sqrt(math.fsum((m[:, j] - mu[j]) ** 2) / n)
    return out
