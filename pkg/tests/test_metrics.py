"""Open-set metric checks: a hand-worked fixture, confusion-table
cross-checks, absence semantics, and input validation."""

import numpy as np
import pytest

from protomine.errors import (
    EmptyInputError,
    IndexOutOfRangeError,
    LabelOutOfRangeError,
    LengthMismatchError,
    UndefinedMetricError,
)
from protomine.metrics import (
    aose,
    aose_from_confusion,
    base_accuracy_from_confusion,
    collapse_novel,
    confusion,
    evaluate,
    novel_recall_from_confusion,
    selection_metrics,
    wilderness_impact,
    wilderness_impact_from_confusion,
)

# two base classes; three base-truth samples all predicted correctly,
# three novel-truth samples of which one leaks into base class 1
FIXTURE_PREDS = [1, 2, 1, 1, 3, 3]
FIXTURE_TRUTHS = [1, 2, 1, 4, 4, 4]
FIXTURE_C = 2


class TestFixture:
    def test_wilderness_impact_value(self):
        # closed-set precision 3/3, open-set precision 3/4, ratio minus
        # one gives 1/3
        got = wilderness_impact(FIXTURE_PREDS, FIXTURE_TRUTHS, FIXTURE_C)
        assert got == pytest.approx(1.0 / 3.0, abs=1e-9)

    def test_aose_value(self):
        assert aose(FIXTURE_PREDS, FIXTURE_TRUTHS, FIXTURE_C) == 1

    def test_confusion_table(self):
        table = confusion(FIXTURE_PREDS, FIXTURE_TRUTHS, FIXTURE_C)
        want = np.array([
            [0, 0, 0],   # background truths: none
            [2, 0, 0],   # truth 1 -> pred 1 twice
            [0, 1, 0],   # truth 2 -> pred 2
            [1, 0, 2],   # collapsed novel -> pred 1 once, pred 3 twice
        ])
        assert table.shape == (FIXTURE_C + 2, FIXTURE_C + 1)
        assert np.array_equal(table, want)

    def test_confusion_helpers_agree(self):
        table = confusion(FIXTURE_PREDS, FIXTURE_TRUTHS, FIXTURE_C)
        assert base_accuracy_from_confusion(table, FIXTURE_C) == 1.0
        assert novel_recall_from_confusion(table, FIXTURE_C) == pytest.approx(2.0 / 3.0)
        assert aose_from_confusion(table, FIXTURE_C) == 1
        assert wilderness_impact_from_confusion(table, FIXTURE_C) == pytest.approx(
            1.0 / 3.0, abs=1e-9
        )

    def test_evaluate_report(self):
        report = evaluate(FIXTURE_PREDS, FIXTURE_TRUTHS, FIXTURE_C)
        assert report.base_accuracy == 1.0
        assert report.novel_recall == pytest.approx(2.0 / 3.0)
        assert report.wilderness_impact == pytest.approx(1.0 / 3.0, abs=1e-9)
        assert report.aose == 1
        assert report.selection_precision is None
        assert report.selection_recall is None

    def test_per_class_breakdown(self):
        report = evaluate(FIXTURE_PREDS, FIXTURE_TRUTHS, FIXTURE_C)
        assert report.per_class_precision[1] == pytest.approx(2.0 / 3.0)
        assert report.per_class_precision[2] == 1.0
        assert report.per_class_precision[3] == 1.0
        assert report.per_class_recall[1] == 1.0
        assert report.per_class_recall[2] == 1.0
        assert report.per_class_recall[3] == pytest.approx(2.0 / 3.0)


class TestCollapseNovel:
    def test_individual_novel_labels_fold_onto_unified(self):
        got = collapse_novel([0, 1, 5, 6, 7, 9], 5)
        assert np.array_equal(got, [0, 1, 5, 6, 6, 6])

    def test_idempotent(self):
        rng = np.random.default_rng(21)
        truths = rng.integers(0, 12, size=200)
        once = collapse_novel(truths, 5)
        assert np.array_equal(collapse_novel(once, 5), once)

    def test_rejects_negative(self):
        with pytest.raises(LabelOutOfRangeError):
            collapse_novel([1, -1], 5)


class TestAgainstConfusion:
    def test_streaming_paths_match_table_recomputation(self):
        # randomized cross-check of every metric against the confusion
        # table arithmetic
        rng = np.random.default_rng(22)
        for _ in range(50):
            c = int(rng.integers(2, 7))
            extra = int(rng.integers(1, 4))
            n = int(rng.integers(1, 41))
            preds = rng.integers(1, c + 2, size=n)
            truth_pool = np.concatenate(
                [np.arange(0, c + 1), np.arange(c + 2, c + 2 + extra)]
            )
            truths = truth_pool[rng.integers(0, truth_pool.size, size=n)]
            table = confusion(preds, truths, c)
            report = evaluate(preds, truths, c)

            want_acc = base_accuracy_from_confusion(table, c)
            if want_acc is None:
                assert report.base_accuracy is None
            else:
                assert report.base_accuracy == pytest.approx(want_acc, rel=1e-12)

            want_recall = novel_recall_from_confusion(table, c)
            if want_recall is None:
                assert report.novel_recall is None
            else:
                assert report.novel_recall == pytest.approx(want_recall, rel=1e-12)

            assert report.aose == aose_from_confusion(table, c)
            assert report.aose == aose(preds, truths, c)

            want_wi = wilderness_impact_from_confusion(table, c)
            if want_wi is None:
                assert report.wilderness_impact is None
            else:
                assert report.wilderness_impact == pytest.approx(want_wi, rel=1e-12)


class TestWildernessImpact:
    def test_unshifted_predictions_give_zero(self):
        # same base precision on both subsets means no impact
        got = wilderness_impact([1, 2, 3, 3], [1, 2, 4, 5], 2)
        assert got == 0.0

    def test_undefined_without_base_predictions_on_base_truths(self):
        with pytest.raises(UndefinedMetricError):
            wilderness_impact([3, 3, 3], [1, 2, 4], 2)

    def test_undefined_without_foreground_truths(self):
        with pytest.raises(UndefinedMetricError):
            wilderness_impact([1, 2], [0, 0], 2)

    def test_undefined_when_open_precision_is_zero(self):
        with pytest.raises(UndefinedMetricError):
            wilderness_impact([2, 1], [1, 2], 2)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            wilderness_impact([1, 2], [1, 2, 3], 2)


class TestAose:
    def test_counts_only_base_predictions_on_novel_truths(self):
        assert aose([1, 2, 3, 1, 2], [4, 4, 4, 1, 0], 2) == 2

    def test_zero_when_novel_is_caught(self):
        assert aose([3, 3], [4, 5], 2) == 0


class TestSelectionMetrics:
    def test_perfect_selection(self):
        precision, recall = selection_metrics([0, 1], [9, 9, 1, 0], 5)
        assert precision == 1.0
        assert recall == 1.0

    def test_partial_selection(self):
        # one hit out of two picks, one of four pool novelties found
        precision, recall = selection_metrics([0, 4], [7, 8, 9, 10, 1, 1], 5)
        assert precision == 0.5
        assert recall == 0.25

    def test_recall_absent_without_pool_novel(self):
        precision, recall = selection_metrics([0, 1], [1, 2, 0], 5)
        assert precision == 0.0
        assert recall is None

    def test_precision_absent_for_empty_selection(self):
        precision, recall = selection_metrics([], [7, 1, 0], 5)
        assert precision is None
        assert recall == 0.0

    def test_index_out_of_range(self):
        with pytest.raises(IndexOutOfRangeError):
            selection_metrics([3], [7, 1, 0], 5)
        with pytest.raises(IndexOutOfRangeError):
            selection_metrics([-1], [7, 1, 0], 5)

    def test_requires_flat_inputs(self):
        with pytest.raises(LengthMismatchError):
            selection_metrics([[0]], [7, 1, 0], 5)


class TestEvaluate:
    def test_absent_metrics_are_none_not_zero(self):
        # background truths only: every headline metric is absent
        report = evaluate([1, 2], [0, 0], 2)
        assert report.base_accuracy is None
        assert report.novel_recall is None
        assert report.wilderness_impact is None
        assert report.aose == 0

    def test_selection_passthrough(self):
        report = evaluate(
            [1, 2], [1, 2], 2, selected_indices=[0], pool_truths=[4, 1]
        )
        assert report.selection_precision == 1.0
        assert report.selection_recall == 1.0

    def test_rejects_bad_inputs(self):
        with pytest.raises(EmptyInputError):
            evaluate([], [], 2)
        with pytest.raises(LengthMismatchError):
            evaluate([1], [1, 2], 2)
        with pytest.raises(LabelOutOfRangeError):
            evaluate([0, 1], [1, 2], 2)
        with pytest.raises(LabelOutOfRangeError):
            evaluate([1, 4], [1, 2], 2)
        with pytest.raises(LabelOutOfRangeError):
            evaluate([1, 2], [1, -2], 2)


class TestConfusion:
    def test_empty_inputs_give_zero_table(self):
        table = confusion([], [], 3)
        assert table.shape == (5, 4)
        assert table.sum() == 0

    def test_rejects_out_of_range_predictions(self):
        with pytest.raises(LabelOutOfRangeError):
            confusion([5], [1], 3)

    def test_rejects_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            confusion([1, 2], [1], 3)
