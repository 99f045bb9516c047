"""Error metrics, capped ROC area and bag aggregation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.bags import Bag, BagSet
from src.errors import DomainError, LengthMismatch, SingleClass
from src.eval import (
    Aggregation,
    ErrorKind,
    baseline_fusion,
    mean_relative_error,
    predict_bags,
    relative_error,
    rmse,
    roc_auc_capped,
    roc_curve,
)
from src.measure import build_measure

unit = st.floats(0.0, 1.0, allow_nan=False)


class TestRelativeError:
    def test_classification(self):
        assert relative_error(ErrorKind.CLASSIFICATION, 1.0, 0.9) == pytest.approx(0.1)

    def test_regression(self):
        assert relative_error("reg", 0.5, 0.4) == pytest.approx(0.2)

    def test_regression_at_zero(self):
        assert relative_error("reg", 0.0, 0.1) == pytest.approx(0.1)

    @given(y=unit)
    def test_exact_prediction(self, y):
        assert relative_error(ErrorKind.REGRESSION, y, y) == 0.0

    def test_regression_truth_range(self):
        with pytest.raises(DomainError):
            relative_error("reg", 1.5, 1.0)

    def test_non_finite(self):
        with pytest.raises(DomainError):
            relative_error("cls", float("nan"), 0.0)

    def test_mean(self):
        assert mean_relative_error("cls", [1, 0, 1], [0.5, 0.5, 1.0]) == pytest.approx(1 / 3)


class TestRmse:
    def test_identical(self):
        assert rmse([0.2, 0.4], [0.2, 0.4]) == 0.0

    def test_swapped(self):
        assert rmse([0, 1], [1, 0]) == 1.0

    def test_off_scale(self):
        assert rmse([2, 4], [3, 3]) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            rmse([1, 2], [1])


class TestRoc:
    def test_perfect_detector(self):
        labels = np.r_[np.ones(50), np.zeros(500)]
        scores = np.r_[np.full(50, 0.9), np.linspace(0.0, 0.5, 500)]
        assert abs(roc_auc_capped(scores, labels, 1e-3) - 1e-3) < 1e-9

    def test_random_scores_follow_diagonal(self):
        rng = np.random.default_rng(0)
        labels = (rng.random(100_000) < 0.5).astype(float)
        scores = rng.random(100_000)
        cap = 0.1
        assert roc_auc_capped(scores, labels, cap) == pytest.approx(cap ** 2 / 2, rel=0.2)

    def test_single_class(self):
        with pytest.raises(SingleClass):
            roc_auc_capped([0.1, 0.2], [1, 1])

    def test_ties_enter_together(self):
        far, pd = roc_curve([0.5, 0.5, 0.5, 0.1], [1, 0, 1, 0])
        assert list(far) == [0.0, 0.5, 1.0] and list(pd) == [0.0, 1.0, 1.0]

    def test_interpolates_at_cap(self):
        # curve (0,0) → (0.5, 1) → (1, 1); area to 0.25 is the triangle under pd = 2·far
        scores, labels = [0.5, 0.5, 0.5, 0.1], [1, 0, 1, 0]
        assert roc_auc_capped(scores, labels, 0.25) == pytest.approx(0.0625)

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_monotone_transform_invariance(self, seed):
        rng = np.random.default_rng(seed)
        labels = np.r_[1.0, 0.0, (rng.random(200) < 0.3).astype(float)]
        scores = rng.random(202)
        a = roc_auc_capped(scores, labels, 0.2)
        b = roc_auc_capped(np.exp(3 * scores) - 7, labels, 0.2)
        assert a == b

    def test_area_grows_with_cap(self):
        rng = np.random.default_rng(1)
        labels = np.r_[1.0, 0.0, (rng.random(500) < 0.4).astype(float)]
        scores = labels * 0.3 + rng.random(502)
        areas = [roc_auc_capped(scores, labels, c) for c in (0.01, 0.05, 0.2, 0.6, 1.0)]
        assert areas == sorted(areas)


class TestAggregation:
    def bags(self):
        return BagSet([
            Bag("two", 1, [[0.2, 0.2], [0.8, 0.8]]),
            Bag("one", 0, [[0.3, 0.6]]),
            Bag("flat", 0, [[0.4, 0.4], [0.4, 0.4], [0.4, 0.4]]),
        ])

    @pytest.mark.parametrize("agg,first", [("mean", 0.5), ("max", 0.8), ("min", 0.2)])
    def test_rules(self, agg, first):
        g = build_measure(2, [0.5, 0.5, 1.0])
        out = predict_bags(self.bags(), g, agg)
        assert out[0] == pytest.approx(first)
        assert out[1] == pytest.approx(0.45)  # the singleton's own CI
        assert out[2] == pytest.approx(0.4)

    def test_default_is_mean(self):
        g = build_measure(2, [0.5, 0.5, 1.0])
        assert np.array_equal(predict_bags(self.bags(), g), predict_bags(self.bags(), g, Aggregation.MEAN))

    def test_dimension_mismatch(self):
        from src.errors import DimensionMismatch

        with pytest.raises(DimensionMismatch):
            predict_bags(self.bags(), build_measure(3, np.r_[np.zeros(6), 1.0]))

    def test_baselines(self):
        x = np.array([[0.1, 0.5, 0.9], [0.3, 0.3, 0.6]])
        assert np.allclose(baseline_fusion(x, "min"), [0.1, 0.3])
        assert np.allclose(baseline_fusion(x, "max"), [0.9, 0.6])
        assert np.allclose(baseline_fusion(x, "mean"), [0.5, 0.4])
