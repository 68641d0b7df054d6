"""Seeded k-means with deterministic tie-breaking.

The clustering is fully reproducible: identical points and seed give a
bitwise-identical result. Ties in the assignment step go to the lowest
centroid index, and every random draw comes from one generator built
from the caller's seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRangeError, InvalidConfigError, TooFewPointsError
from .numerics import as_matrix


@dataclass(frozen=True)
class Clustering:
    """Result of one k-means run.

    assignments: per-point cluster index, shape (n,)
    centroids:   cluster centers, shape (k, dim); centroid j is the exact
                 mean of the points assigned to cluster j
    inertia:     sum of squared distances from each point to its centroid
    """

    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float


def _pairwise_sq(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centers[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _seed_centers(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: first center uniform, later ones D^2-weighted."""
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]), dtype=np.float64)
    centers[0] = points[rng.integers(n)]
    for j in range(1, k):
        d2 = _pairwise_sq(points, centers[:j]).min(axis=1)
        total = float(d2.sum())
        if total <= 0.0:
            # all remaining points coincide with chosen centers
            centers[j] = points[rng.integers(n)]
            continue
        centers[j] = points[rng.choice(n, p=d2 / total)]
    return centers


def _assign(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # argmin returns the first minimum, so ties go to the lowest index
    return _pairwise_sq(points, centers).argmin(axis=1)


def _repair_empty(points: np.ndarray, centers: np.ndarray, assignments: np.ndarray, k: int) -> np.ndarray:
    """Give each empty cluster the point currently farthest from its centroid.

    Points that are their cluster's sole member stay put, otherwise the
    donation would just move the hole.
    """
    assignments = assignments.copy()
    for j in range(k):
        if np.any(assignments == j):
            continue
        dist = np.linalg.norm(points - centers[assignments], axis=1)
        counts = np.bincount(assignments, minlength=k)
        movable = counts[assignments] > 1
        if not np.any(movable):
            continue
        dist = np.where(movable, dist, -np.inf)
        assignments[int(dist.argmax())] = j
    return assignments


def _means(points: np.ndarray, assignments: np.ndarray, k: int) -> np.ndarray:
    return np.stack([points[assignments == j].mean(axis=0) for j in range(k)])


def kmeans(points, k: int, seed: int, max_iters: int = 100, tol: float = 1e-6,
           debug: bool = False) -> Clustering:
    """Cluster points into k groups with Lloyd's algorithm.

    Stops when the assignment reaches a fixed point, when the largest
    centroid shift falls below tol, or after max_iters rounds. With
    debug=True each round asserts that the inertia did not increase.
    """
    pts = as_matrix(points)
    n = pts.shape[0]
    if k < 1:
        raise InvalidConfigError("k must be at least 1")
    if n < k:
        raise TooFewPointsError(f"{n} points cannot form {k} clusters")
    if max_iters < 1:
        raise InvalidConfigError("max_iters must be at least 1")

    rng = np.random.default_rng(seed)
    centers = _seed_centers(pts, k, rng)
    assignments = _repair_empty(pts, centers, _assign(pts, centers), k)
    prev_inertia = np.inf

    for _ in range(max_iters):
        new_centers = _means(pts, assignments, k)
        shift = float(np.linalg.norm(new_centers - centers, axis=1).max())
        centers = new_centers
        new_assignments = _repair_empty(pts, centers, _assign(pts, centers), k)
        if debug:
            inertia = float(_pairwise_sq(pts, centers)[np.arange(n), new_assignments].sum())
            assert inertia <= prev_inertia + 1e-9, "inertia increased across a round"
            prev_inertia = inertia
        if np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
        if shift < tol:
            break

    centers = _means(pts, assignments, k)
    inertia = float(_pairwise_sq(pts, centers)[np.arange(n), assignments].sum())
    return Clustering(assignments=assignments, centroids=centers, inertia=inertia)


def cluster_of_point(result: Clustering, index: int) -> int:
    """Cluster index of the point at the given position."""
    n = result.assignments.shape[0]
    if not 0 <= index < n:
        raise IndexOutOfRangeError(f"point index {index} outside 0..{n - 1}")
    return int(result.assignments[index])
