#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Plot Series Tests
"""

import math

import numpy as np
import pandas as pd
import pytest

from app.fairness.audit import fairness_check
from app.fairness.metrics import ALL_METRICS, MetricId
from app.plots.series import (
    PlotKind,
    choose_metric_view,
    cutoff_sweep,
    fairness_check_view,
    group_metric_view,
    heatmap_view,
    metric_scores_view,
    parity_loss_matrix,
    pca_projection,
    performance_vs_fairness,
    radar_view,
    score_density,
    stack_metrics_view,
)
from app.utils.errors import ParameterError, ValidationError
from tests.conftest import make_dataset


@pytest.fixture
def two_models(spec_ab):
    """'m' starves subgroup b of positives, 'fair' treats both subgroups alike"""
    d = make_dataset(
        [1, 1, 0, 0] * 2,
        ["a"] * 4 + ["b"] * 4,
        {
            "m": [0.9, 0.8, 0.6, 0.1, 0.3, 0.2, 0.1, 0.1],
            "fair": [0.9, 0.4, 0.6, 0.1] * 2,
        },
    )
    return d, fairness_check(d, spec_ab)


def by_labels(series, **labels):
    return [p for p in series.points if all(p.labels.get(k) == v for k, v in labels.items())]


class TestPlotKind:

    def test_parse_deduplicates(self):
        assert PlotKind.parse(["radar", " radar", "pca"]) == (PlotKind.RADAR, PlotKind.PCA)

    def test_unknown_kind_lists_valid(self):
        with pytest.raises(ValidationError, match="fairness_check_bars"):
            PlotKind.parse(["pie"])


class TestParityLossMatrix:

    def test_undefined_entries_are_nan(self, two_models):
        _, audit = two_models
        m = parity_loss_matrix(audit)
        assert m.shape == (2, len(ALL_METRICS))
        assert list(m.index) == ["m", "fair"]
        assert math.isnan(m.loc["m", "TPR"])
        assert m.loc["m", "ACC"] == pytest.approx(math.log(1.5))
        assert (m.loc["fair"] == 0.0).all()


class TestAuditViews:

    def test_fairness_check_bars(self, two_models):
        _, audit = two_models
        series = fairness_check_view(audit)
        assert len(series.points) == 2 * 5
        assert series.annotations["band"] == [0.8, 1.25]
        for p in series.points:
            if not p.missing:
                assert p.values[2] == abs(p.values[0] - 1.0)
        (acc,) = by_labels(series, model="m", metric="ACC")
        assert acc.values[2] == pytest.approx(1 / 3)
        assert acc.labels["verdict"] == "fail"
        (ppv,) = by_labels(series, model="m", metric="PPV")
        assert ppv.missing
        assert ppv.labels["verdict"] == "inconclusive"

    def test_metric_scores(self, two_models, spec_ab):
        _, audit = two_models
        series = metric_scores_view(audit.table(), spec_ab)
        assert len(series.points) == 2 * 5 * 2
        assert all(p.labels["privileged"] == (p.labels["subgroup"] == "a") for p in series.points)
        (ppv_b,) = by_labels(series, model="m", metric="PPV", subgroup="b")
        assert ppv_b.missing
        assert ppv_b.values == (None,)

    def test_group_metric(self, two_models):
        _, audit = two_models
        series = group_metric_view(audit, metric="FPR", performance="accuracy")
        (perf,) = by_labels(series, model="fair", panel="performance")
        assert perf.values == (0.5,)
        assert len(by_labels(series, panel="metric")) == 4

    def test_group_metric_unknown_performance(self, two_models):
        _, audit = two_models
        with pytest.raises(ParameterError):
            group_metric_view(audit, performance="recall")

    def test_performance_and_fairness(self, two_models):
        _, audit = two_models
        series = performance_vs_fairness(audit)
        (fair,) = by_labels(series, model="fair")
        assert fair.values == (0.0, 0.5)
        (skewed,) = by_labels(series, model="m")
        assert skewed.values[0] == pytest.approx(-math.log(1.5))
        assert series.params["fairness_transform"] == "negate"
        assert any("undefined" in note for note in series.annotations["notes"])


class TestMatrixViews:

    MATRIX = pd.DataFrame({"TPR": [1.0, 3.0], "FPR": [2.0, 2.0]}, index=["m1", "m2"])

    def test_radar_keeps_every_cell(self):
        series = radar_view(self.MATRIX)
        assert [p.values[0] for p in series.points] == [1.0, 2.0, 3.0, 2.0]

    def test_heatmap_normalization(self):
        series = heatmap_view(self.MATRIX, normalize=True)
        assert [p.values[0] for p in series.points] == [-1.0, 0.0, 1.0, 0.0]
        assert series.params["normalize"] is True

    def test_heatmap_raw(self):
        series = heatmap_view(self.MATRIX)
        assert [p.values[0] for p in series.points] == [1.0, 2.0, 3.0, 2.0]

    def test_stack_skips_undefined(self):
        m = pd.DataFrame({"TPR": [0.5], "PPV": [np.nan], "FPR": [0.25]}, index=["m1"])
        series = stack_metrics_view(m)
        assert series.points[0].values == (0.5, 0.0, 0.5)
        assert series.points[1].missing
        assert series.points[2].values == (0.25, 0.5, 0.75)
        assert series.annotations["totals"] == {"m1": 0.75}

    def test_choose_metric(self):
        series = choose_metric_view(self.MATRIX, "FPR")
        assert [p.values[0] for p in series.points] == [2.0, 2.0]
        with pytest.raises(ValidationError):
            choose_metric_view(self.MATRIX, MetricId.ACC)


class TestPcaProjection:

    def test_two_models_on_one_axis(self):
        m = pd.DataFrame({"TPR": [0.0, 2.0], "FPR": [0.0, 0.0]}, index=["m1", "m2"])
        series = pca_projection(m)
        models = by_labels(series, type="model")
        (x1, y1), (x2, y2) = models[0].values, models[1].values
        assert math.hypot(x1 - x2, y1 - y2) == pytest.approx(2.0)
        assert series.annotations["explained_variance"][0] == pytest.approx(1.0)
        assert len(by_labels(series, type="metric")) == 2

    def test_identical_models(self):
        m = pd.DataFrame({"TPR": [0.3, 0.3], "FPR": [0.1, 0.1]}, index=["m1", "m2"])
        series = pca_projection(m)
        assert all(p.values == (0.0, 0.0) for p in by_labels(series, type="model"))
        assert series.annotations["explained_variance"] == [0.0, 0.0]

    def test_undefined_columns_are_dropped(self):
        m = pd.DataFrame(
            {"TPR": [np.nan, 1.0, 0.5], "FPR": [0.1, 0.4, 0.2], "STP": [0.3, 0.0, 0.9]},
            index=["m1", "m2", "m3"],
        )
        series = pca_projection(m)
        assert series.annotations["dropped_metrics"] == ["TPR"]
        assert series.params["metrics"] == ["FPR", "STP"]

    def test_needs_two_models(self):
        with pytest.raises(ValidationError):
            pca_projection(pd.DataFrame({"TPR": [0.1], "FPR": [0.2]}, index=["m1"]))


class TestScoreDensity:

    def test_half_goes_to_upper_bin(self, spec_ab):
        d = make_dataset([1, 0], ["a", "b"], {"m": [0.5, 1.0]})
        series = score_density(d, spec_ab, "m", bins=2)
        a_bins = by_labels(series, subgroup="a")
        assert [p.values[2] for p in a_bins] == [0.0, 1.0]
        assert a_bins[0].values[:2] == (0.0, 0.5)
        b_bins = by_labels(series, subgroup="b")
        assert [p.values[2] for p in b_bins] == [0.0, 1.0]

    def test_fractions_sum_to_one(self, skewed, spec_ab):
        series = score_density(skewed, spec_ab, "m")
        for level in ("a", "b"):
            points = by_labels(series, subgroup=level)
            assert len(points) == 20
            assert sum(p.values[2] for p in points) == pytest.approx(1.0)
            assert all(p.labels["privileged"] == (level == "a") for p in points)

    def test_bins_range(self, skewed, spec_ab):
        with pytest.raises(ParameterError):
            score_density(skewed, spec_ab, "m", bins=1)


class TestCutoffSweep:

    def test_cumulated_matches_audit_total(self, skewed, spec_ab):
        series = cutoff_sweep(skewed, spec_ab, "m", grid=[0.5], cumulated=True)
        (p,) = series.points
        assert series.kind is PlotKind.ALL_CUTOFFS
        assert p.values == (0.5, fairness_check(skewed, spec_ab).model("m").total_loss)
        assert p.labels == {"skipped": 4}

    def test_all_undefined_cutoff_is_missing(self, balanced, spec_ab):
        series = cutoff_sweep(balanced, spec_ab, "m", metrics=["TPR", "PPV"], grid=[0.95], cumulated=True)
        assert series.points[0].missing

    def test_per_metric_points(self, balanced, spec_ab):
        series = cutoff_sweep(balanced, spec_ab, "m", grid=[0.3, 0.5])
        assert len(series.points) == 2 * 5
        assert {p.labels["metric"] for p in series.points} == {"TPR", "PPV", "FPR", "STP", "ACC"}

    def test_ceteris_paribus_minimum(self, balanced, spec_ab):
        series = cutoff_sweep(balanced, spec_ab, "m", subgroup="b", cumulated=True)
        assert series.kind is PlotKind.CETERIS_PARIBUS_CUTOFF
        assert series.annotations["minimum"] == {"cutoff": 0.41, "loss": 0.0, "skipped": 0}
        assert series.params["subgroup"] == "b"
