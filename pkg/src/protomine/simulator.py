"""Synthetic two-domain benchmark with hidden novel classes.

A spec places C base and C' novel class means on a sphere; the target
domain sees the same classes through a global shift plus a small
per-class jitter. Batches mix foreground features (isotropic Gaussian
around the domain's class means) with broad zero-centered background
clutter, and attach a foreground score to every entry: foreground and
background scores are drawn from disjoint uniform ranges.

Label conventions, used package-wide:

    0            background
    1..C         base classes
    C+1          reserved for the unified novel prediction, never a truth
    C+2..C+1+C'  individual novel classes (target-only)

Source batches never carry novel labels: their foreground is drawn from
base classes only. Algorithms must only look at ``features``,
``fg_scores``, and (source side) the matched base labels; ``true_labels``
of target batches exist for evaluation code alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfigError

SOURCE = "source"
TARGET = "target"

_SEPARATION_FACTOR = 4.0


@dataclass(frozen=True)
class ScoreParams:
    """Uniform ranges for foreground/background scores; must not overlap."""

    fg_low: float = 0.6
    fg_high: float = 1.0
    bg_low: float = 0.0
    bg_high: float = 0.4


@dataclass(frozen=True)
class DomainSpec:
    """Materialized benchmark geometry shared by both domains."""

    num_base: int
    num_novel: int
    dim: int
    mean_radius: float
    class_spread: float
    background_spread: float
    shift_magnitude: float
    jitter_spread: float
    source_means: np.ndarray  # (C + C', dim); rows 0..C-1 base, C.. novel
    target_means: np.ndarray  # source_means + shift_offset + per-class jitter
    shift_offset: np.ndarray  # (dim,)
    score_params: ScoreParams = field(default_factory=ScoreParams)

    def novel_labels(self) -> range:
        """The individual novel class labels, C+2..C+1+C'."""
        return range(self.num_base + 2, self.num_base + 2 + self.num_novel)

    def mean_row(self, label: int) -> int:
        """Row into the mean tables for a foreground label."""
        if 1 <= label <= self.num_base:
            return label - 1
        if label in self.novel_labels():
            return label - 2
        raise InvalidConfigError(f"label {label} has no class mean")


@dataclass(frozen=True)
class LabeledBatch:
    """Parallel features / truth labels / foreground scores for one domain."""

    features: np.ndarray
    true_labels: np.ndarray
    domain: str
    fg_scores: np.ndarray


def make_spec(num_base: int, num_novel: int, dim: int, seed: int,
              mean_radius: float = 10.0, class_spread: float = 1.0,
              background_spread: float = 15.0, shift_magnitude: float = 2.0,
              jitter_spread: float = 0.2,
              score_params: ScoreParams | None = None) -> DomainSpec:
    """Generate benchmark geometry from a seed.

    Class means are random directions scaled to ``mean_radius``. If any
    two means land closer than 4x the class spread the whole draw is
    retried with seed+1, so accepted geometry always keeps class clouds
    apart. The target means add one global shift vector of length
    ``shift_magnitude`` plus per-class jitter.
    """
    if num_base < 2:
        raise InvalidConfigError("need at least two base classes")
    if num_novel < 1:
        raise InvalidConfigError("need at least one novel class")
    if dim < 2:
        raise InvalidConfigError("need dim >= 2")
    if mean_radius <= 0 or class_spread <= 0 or background_spread <= 0:
        raise InvalidConfigError("radius and spreads must be positive")
    if shift_magnitude < 0 or jitter_spread < 0:
        raise InvalidConfigError("shift and jitter must be non-negative")
    sp = score_params if score_params is not None else ScoreParams()
    if not (0 <= sp.bg_low < sp.bg_high <= sp.fg_low < sp.fg_high):
        raise InvalidConfigError("score ranges must be ordered and disjoint")

    total = num_base + num_novel
    attempt = seed
    while True:
        rng = np.random.default_rng(attempt)
        directions = rng.standard_normal((total, dim))
        means = mean_radius * directions / np.linalg.norm(directions, axis=1, keepdims=True)
        shift_dir = rng.standard_normal(dim)
        shift = shift_magnitude * shift_dir / np.linalg.norm(shift_dir)
        jitter = jitter_spread * rng.standard_normal((total, dim))
        diffs = means[:, None, :] - means[None, :, :]
        dist = np.linalg.norm(diffs, axis=2)
        np.fill_diagonal(dist, np.inf)
        if dist.min() > _SEPARATION_FACTOR * class_spread:
            break
        attempt += 1

    return DomainSpec(
        num_base=num_base,
        num_novel=num_novel,
        dim=dim,
        mean_radius=mean_radius,
        class_spread=class_spread,
        background_spread=background_spread,
        shift_magnitude=shift_magnitude,
        jitter_spread=jitter_spread,
        source_means=means,
        target_means=means + shift + jitter,
        shift_offset=shift,
        score_params=sp,
    )


def sample_batch(spec: DomainSpec, domain: str, n_foreground: int, n_background: int,
                 seed: int) -> LabeledBatch:
    """Draw one labeled batch.

    Foreground classes are uniform over the domain's label set (base only
    for source; base plus novel for target); background features are
    zero-centered. Entries are ordered foreground first, background last.
    """
    if domain not in (SOURCE, TARGET):
        raise InvalidConfigError(f"unknown domain {domain!r}")
    if n_foreground < 0 or n_background < 0:
        raise InvalidConfigError("batch sizes must be non-negative")
    if n_foreground + n_background < 1:
        raise InvalidConfigError("need at least one entry")

    rng = np.random.default_rng(seed)
    if domain == SOURCE:
        label_set = np.arange(1, spec.num_base + 1)
        means = spec.source_means
    else:
        label_set = np.array(list(range(1, spec.num_base + 1)) + list(spec.novel_labels()))
        means = spec.target_means

    labels = label_set[rng.integers(0, len(label_set), n_foreground)]
    rows = np.array([spec.mean_row(int(l)) for l in labels], dtype=np.int64)
    fg = (means[rows] + spec.class_spread * rng.standard_normal((n_foreground, spec.dim))
          if n_foreground else np.empty((0, spec.dim)))
    bg = (spec.background_spread * rng.standard_normal((n_background, spec.dim))
          if n_background else np.empty((0, spec.dim)))

    sp = spec.score_params
    fg_scores = rng.uniform(sp.fg_low, sp.fg_high, n_foreground)
    bg_scores = rng.uniform(sp.bg_low, sp.bg_high, n_background)

    return LabeledBatch(
        features=np.vstack([fg, bg]),
        true_labels=np.concatenate([labels, np.zeros(n_background, dtype=np.int64)]),
        domain=domain,
        fg_scores=np.concatenate([fg_scores, bg_scores]),
    )
