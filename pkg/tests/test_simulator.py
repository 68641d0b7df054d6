"""Benchmark generator checks: geometry invariants, label conventions,
score separation, and reproducibility."""

import numpy as np
import pytest

from protomine.errors import InvalidConfigError
from protomine.simulator import (
    SOURCE,
    TARGET,
    DomainSpec,
    ScoreParams,
    make_spec,
    sample_batch,
)


class TestMakeSpec:
    def test_deterministic(self):
        one = make_spec(5, 3, 32, seed=42)
        two = make_spec(5, 3, 32, seed=42)
        assert np.array_equal(one.source_means, two.source_means)
        assert np.array_equal(one.target_means, two.target_means)
        assert np.array_equal(one.shift_offset, two.shift_offset)

    def test_seeds_differ(self):
        one = make_spec(5, 3, 32, seed=1)
        two = make_spec(5, 3, 32, seed=2)
        assert not np.array_equal(one.source_means, two.source_means)

    def test_mean_norms_hit_radius(self):
        spec = make_spec(4, 2, 16, seed=5, mean_radius=10.0)
        norms = np.linalg.norm(spec.source_means, axis=1)
        assert np.allclose(norms, 10.0, atol=1e-9)

    def test_shift_has_requested_magnitude(self):
        spec = make_spec(3, 2, 8, seed=6, shift_magnitude=2.0)
        assert np.linalg.norm(spec.shift_offset) == pytest.approx(2.0, abs=1e-12)

    def test_class_means_stay_separated(self):
        # the generator retries until every pairwise gap clears 4x the
        # class spread, so the invariant must hold for any accepted spec
        for seed in range(10):
            for spread in (1.0, 3.0):
                spec = make_spec(3, 2, 4, seed=seed, class_spread=spread)
                means = spec.source_means
                dists = np.linalg.norm(means[:, None, :] - means[None, :, :], axis=2)
                np.fill_diagonal(dists, np.inf)
                assert dists.min() > 4.0 * spread

    def test_zero_jitter_is_pure_shift(self):
        spec = make_spec(4, 2, 8, seed=7, jitter_spread=0.0)
        assert np.array_equal(spec.target_means, spec.source_means + spec.shift_offset)

    def test_novel_labels_range(self):
        spec = make_spec(5, 3, 8, seed=8)
        assert list(spec.novel_labels()) == [7, 8, 9]

    def test_mean_row(self):
        spec = make_spec(5, 3, 8, seed=9)
        assert spec.mean_row(1) == 0
        assert spec.mean_row(5) == 4
        assert spec.mean_row(7) == 5
        assert spec.mean_row(9) == 7
        for bad in (0, 6, 10):
            # background, the unified novel slot, and out-of-range labels
            # have no class mean
            with pytest.raises(InvalidConfigError):
                spec.mean_row(bad)

    def test_rejects_bad_config(self):
        with pytest.raises(InvalidConfigError):
            make_spec(1, 3, 8, seed=0)
        with pytest.raises(InvalidConfigError):
            make_spec(5, 0, 8, seed=0)
        with pytest.raises(InvalidConfigError):
            make_spec(5, 3, 1, seed=0)
        with pytest.raises(InvalidConfigError):
            make_spec(5, 3, 8, seed=0, mean_radius=0.0)
        with pytest.raises(InvalidConfigError):
            make_spec(5, 3, 8, seed=0, class_spread=-1.0)
        with pytest.raises(InvalidConfigError):
            make_spec(5, 3, 8, seed=0, background_spread=0.0)
        with pytest.raises(InvalidConfigError):
            make_spec(5, 3, 8, seed=0, shift_magnitude=-2.0)
        with pytest.raises(InvalidConfigError):
            make_spec(5, 3, 8, seed=0, jitter_spread=-0.1)

    def test_rejects_overlapping_score_ranges(self):
        with pytest.raises(InvalidConfigError):
            make_spec(5, 3, 8, seed=0, score_params=ScoreParams(fg_low=0.3))
        with pytest.raises(InvalidConfigError):
            make_spec(5, 3, 8, seed=0, score_params=ScoreParams(bg_low=0.2, bg_high=0.1))


class TestSampleBatch:
    def test_deterministic(self):
        spec = make_spec(5, 3, 16, seed=10)
        one = sample_batch(spec, TARGET, 20, 10, seed=99)
        two = sample_batch(spec, TARGET, 20, 10, seed=99)
        assert np.array_equal(one.features, two.features)
        assert np.array_equal(one.true_labels, two.true_labels)
        assert np.array_equal(one.fg_scores, two.fg_scores)

    def test_source_never_contains_novel_labels(self):
        spec = make_spec(5, 3, 16, seed=11)
        for seed in range(20):
            batch = sample_batch(spec, SOURCE, 30, 10, seed=seed)
            assert batch.true_labels.max() <= 5
            assert batch.domain == SOURCE

    def test_unified_slot_label_never_sampled(self):
        # label C+1 is a prediction-only convention; no batch from either
        # domain may use it as a truth
        spec = make_spec(5, 3, 16, seed=12)
        for seed in range(20):
            for domain in (SOURCE, TARGET):
                batch = sample_batch(spec, domain, 30, 10, seed=seed)
                assert 6 not in batch.true_labels

    def test_ordering_and_background_labels(self):
        spec = make_spec(5, 3, 16, seed=13)
        batch = sample_batch(spec, TARGET, 12, 7, seed=3)
        assert batch.features.shape == (19, 16)
        assert (batch.true_labels[:12] >= 1).all()
        assert (batch.true_labels[12:] == 0).all()

    def test_scores_separated_by_half(self):
        # thresholding the scores at 0.5 recovers the exact
        # foreground/background split
        spec = make_spec(5, 3, 16, seed=14)
        for seed in range(10):
            batch = sample_batch(spec, TARGET, 25, 15, seed=seed)
            assert (batch.fg_scores[:25] > 0.5).all()
            assert (batch.fg_scores[25:] < 0.5).all()

    def test_foreground_sits_near_class_means(self):
        # with a tiny spread, every foreground feature lands next to the
        # mean of its labeled class in the right domain
        spec = make_spec(4, 2, 8, seed=15, class_spread=0.01, jitter_spread=0.0)
        for domain, means in ((SOURCE, spec.source_means), (TARGET, spec.target_means)):
            batch = sample_batch(spec, domain, 30, 0, seed=4)
            for feat, label in zip(batch.features, batch.true_labels):
                row = spec.mean_row(int(label))
                assert np.linalg.norm(feat - means[row]) < 0.2

    def test_nearest_mean_recovers_labels_at_tiny_spread(self):
        spec = make_spec(4, 2, 8, seed=16, class_spread=0.01)
        gaps = np.linalg.norm(
            spec.source_means[:, None, :] - spec.source_means[None, :, :], axis=2
        )
        np.fill_diagonal(gaps, np.inf)
        assert gaps.min() > 1.0
        batch = sample_batch(spec, SOURCE, 40, 0, seed=5)
        dists = np.linalg.norm(
            batch.features[:, None, :] - spec.source_means[None, :, :], axis=2
        )
        rows = np.array([spec.mean_row(int(l)) for l in batch.true_labels])
        assert np.array_equal(dists.argmin(axis=1), rows)

    def test_target_novel_frequency_matches_uniform_mixing(self):
        # 5 base + 3 novel classes sampled uniformly puts 3/8 of the
        # target foreground in novel classes
        spec = make_spec(5, 3, 16, seed=17)
        novel = 0
        total = 0
        for seed in range(25):
            batch = sample_batch(spec, TARGET, 40, 0, seed=seed)
            novel += int((batch.true_labels >= 7).sum())
            total += 40
        assert total == 1000
        assert novel / total == pytest.approx(0.375, abs=0.05)

    def test_background_only_batch(self):
        spec = make_spec(3, 2, 8, seed=18)
        batch = sample_batch(spec, SOURCE, 0, 6, seed=6)
        assert batch.features.shape == (6, 8)
        assert (batch.true_labels == 0).all()

    def test_foreground_only_batch(self):
        spec = make_spec(3, 2, 8, seed=19)
        batch = sample_batch(spec, TARGET, 6, 0, seed=7)
        assert batch.features.shape == (6, 8)
        assert (batch.true_labels >= 1).all()

    def test_rejects_bad_requests(self):
        spec = make_spec(3, 2, 8, seed=20)
        with pytest.raises(InvalidConfigError):
            sample_batch(spec, "neither", 5, 5, seed=0)
        with pytest.raises(InvalidConfigError):
            sample_batch(spec, SOURCE, -1, 5, seed=0)
        with pytest.raises(InvalidConfigError):
            sample_batch(spec, SOURCE, 5, -1, seed=0)
        with pytest.raises(InvalidConfigError):
            sample_batch(spec, SOURCE, 0, 0, seed=0)
