import numpy as np
import pytest

from errors import ConfigError, InputError, RocError
from evaluation import (
    binarize,
    confusion_and_roc,
    evaluate_target,
    pearson_matrix,
    r2_score,
    regression_metrics,
    resolve_threshold,
    roc_curve,
    roc_frame,
)


class TestRegressionMetrics:
    def test_identical(self):
        series = np.linspace(300.0, 350.0, 9)
        assert regression_metrics(series, series) == (0.0, 0.0)

    def test_constant_offset(self):
        truth = np.array([300.0, 301.5, 299.0, 320.0])
        rmse, mae = regression_metrics(truth + 1.0, truth)
        assert rmse == pytest.approx(1.0, abs=1e-12)
        assert mae == pytest.approx(1.0, abs=1e-12)

    def test_hand_case(self):
        rmse, mae = regression_metrics([0.0, 0.0], [3.0, 4.0])
        assert rmse == pytest.approx(np.sqrt(12.5), rel=1e-15)
        assert mae == 3.5

    @pytest.mark.parametrize("pred,truth", [([1.0, 2.0], [1.0]), ([], [])])
    def test_bad_lengths(self, pred, truth):
        with pytest.raises(InputError):
            regression_metrics(pred, truth)

    def test_r2(self):
        truth = np.array([1.0, 2.0, 3.0, 4.0])
        assert r2_score(truth, truth) == 1.0
        assert r2_score(np.full(4, truth.mean()), truth) == 0.0
        with pytest.raises(InputError):
            r2_score([1.0, 2.0], [5.0, 5.0])


class TestPearson:
    def test_self_and_negation(self):
        x = np.random.default_rng(0).normal(size=50)
        matrix = pearson_matrix({"x": x, "minus_x": -x})
        assert matrix.values[0, 0] == 1.0
        assert matrix.values[0, 1] == pytest.approx(-1.0, abs=1e-12)

    def test_hand_case(self):
        matrix = pearson_matrix({"x": [1.0, 2.0, 3.0], "y": [1.0, 2.0, 4.0]})
        assert round(matrix.values[0, 1], 3) == 0.982
        assert matrix.values[0, 1] == pytest.approx(3.0 / np.sqrt(2.0 * 42.0 / 9.0), rel=1e-12)

    def test_affine_invariance(self):
        rng = np.random.default_rng(1)
        x, y = rng.normal(size=40), rng.normal(size=40)
        base = pearson_matrix({"x": x, "y": y}).values[0, 1]
        shifted = pearson_matrix({"x": 3.0 * x + 7.0, "y": 0.5 * y - 2.0}).values[0, 1]
        flipped = pearson_matrix({"x": -x, "y": y}).values[0, 1]
        assert abs(base - shifted) < 1e-12
        assert abs(base + flipped) < 1e-12

    def test_symmetric_unit_diagonal(self):
        rng = np.random.default_rng(2)
        matrix = pearson_matrix({name: rng.normal(size=30) for name in "abcd"})
        assert np.array_equal(matrix.values, matrix.values.T)
        assert np.all(np.diag(matrix.values) == 1.0)
        frame = matrix.to_frame()
        assert list(frame.columns) == ["variable", "a", "b", "c", "d"]

    def test_constant_column_named(self):
        with pytest.raises(ConfigError, match="'q_rad_W_m2'"):
            pearson_matrix({"time_s": [0.0, 1.0, 2.0], "q_rad_W_m2": [0.0, 0.0, 0.0]})


class TestBinarize:
    def test_median_rule(self):
        assert list(binarize([1.0, 2.0, 3.0, 4.0], quantile=0.5)) == [False, False, True, True]
        assert resolve_threshold([1.0, 2.0, 3.0, 4.0], quantile=0.5) == 2.5

    def test_threshold_extremes(self):
        series = np.array([3.0, -1.0, 8.0])
        assert np.all(binarize(series, threshold=series.min() - 1.0))
        assert not np.any(binarize(series, threshold=series.max() + 1.0))

    def test_quantile_from_reference(self):
        labels = binarize([0.0, 10.0], quantile=0.5, reference=[4.0, 6.0])
        assert list(labels) == [False, True]

    @pytest.mark.parametrize("kwargs", [{}, {"threshold": 1.0, "quantile": 0.5}, {"quantile": 1.5}])
    def test_rule_must_be_well_formed(self, kwargs):
        with pytest.raises(ConfigError):
            binarize([1.0, 2.0], **kwargs)


class TestConfusionAndRoc:
    def test_separated_scores(self):
        report, points = confusion_and_roc([0.9, 0.8, 0.4, 0.3], [1, 1, 0, 0], 0.5)
        assert (report.tp, report.tn, report.fp, report.fn) == (2, 2, 0, 0)
        assert report.acc == 1.0 and report.auc == 1.0
        assert (points[0].fpr, points[0].tpr) == (0.0, 0.0)
        assert (points[-1].fpr, points[-1].tpr) == (1.0, 1.0)

    def test_mixed_scores(self):
        report, _ = confusion_and_roc([0.9, 0.4, 0.8, 0.3], [1, 0, 0, 1], 0.5)
        assert (report.tp, report.fp, report.tn, report.fn) == (1, 1, 1, 1)
        assert report.acc == 0.5 and report.auc == 0.5
        assert report.tpr == 0.5 and report.fpr == 0.5 and report.ppv == 0.5 and report.tnr == 0.5

    def test_single_class_keeps_confusion(self):
        with pytest.raises(RocError) as excinfo:
            confusion_and_roc([0.2, 0.7, 0.9], [1, 1, 1], 0.5)
        report = excinfo.value.report
        assert (report.tp, report.fn, report.fp, report.tn) == (2, 1, 0, 0)
        assert report.fpr is None and report.tnr is None

    def test_counts_add_up(self):
        rng = np.random.default_rng(3)
        scores, labels = rng.normal(size=77), rng.random(77) < 0.4
        report, _ = confusion_and_roc(scores, labels, 0.1)
        assert report.tp + report.fp + report.tn + report.fn == 77
        assert report.acc == pytest.approx((report.tp + report.tn) / 77)

    def test_auc_matches_pair_count(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            n = int(rng.integers(2, 101))
            scores = np.round(rng.random(n), 1)
            labels = rng.random(n) < 0.5
            labels[0], labels[1] = True, False
            pos, neg = scores[labels], scores[~labels]
            greater = np.sum(pos[:, None] > neg[None, :])
            ties = np.sum(pos[:, None] == neg[None, :])
            _, auc = roc_curve(scores, labels)
            assert auc == (2 * greater + ties) / (2 * len(pos) * len(neg))

    def test_sweep_is_monotone(self):
        rng = np.random.default_rng(5)
        points, _ = roc_curve(rng.normal(size=60), rng.random(60) < 0.5)
        thresholds = [p.threshold for p in points]
        assert thresholds == sorted(thresholds, reverse=True)
        assert np.all(np.diff([p.tpr for p in points]) >= 0)
        assert np.all(np.diff([p.fpr for p in points]) >= 0)

    def test_roc_frame(self):
        points, _ = roc_curve([0.9, 0.1], [1, 0])
        frame = roc_frame(points)
        assert list(frame.columns) == ["threshold", "fpr", "tpr"]
        assert len(frame) == 3


class TestEvaluateTarget:
    def test_perfect_prediction(self):
        truth = np.linspace(300.0, 350.0, 20)
        report, points = evaluate_target(truth, truth)
        assert report.acc == 1.0 and report.auc == 1.0
        assert report.rmse == 0.0 and report.mae == 0.0 and report.r2 == 1.0
        assert len(points) == 21

    def test_constant_truth(self):
        report, points = evaluate_target([0.0, 0.0, 0.0], [0.0, 0.0, 0.0])
        assert points == []
        assert report.auc is None and report.r2 is None
        assert report.acc == 1.0
