#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Confusion Matrix and Parity Loss Tests
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from app.data.dataset import CutoffMap, ProtectedSpec, default_cutoffs, partition_subgroups
from app.fairness.metrics import (
    ALL_METRICS,
    Confusion,
    MetricId,
    classify,
    confusion_by_subgroup,
    group_metric_table,
    metric_from_counts,
    metric_ratios,
    metric_values,
    parity_loss,
    parity_losses,
    pooled_performance,
    subgroup_ratio,
    summed_parity_loss,
)
from app.utils.errors import ValidationError
from tests.conftest import make_dataset


def frac(num, den):
    return None if den == 0 else float(Fraction(num, den))


def hand_metrics(tp, fp, tn, fn):
    """Table of formulas evaluated independently"""
    tpr = frac(tp, tp + fn)
    ppv = frac(tp, tp + fp)
    if tp + fn == 0 or tp + fp == 0 or tp == 0:
        f1 = None
    else:
        f1 = float(Fraction(2 * tp, 2 * tp + fp + fn))
    return {
        "TPR": tpr, "TNR": frac(tn, tn + fp), "PPV": ppv, "NPV": frac(tn, tn + fn),
        "FNR": frac(fn, fn + tp), "FPR": frac(fp, fp + tn), "FDR": frac(fp, fp + tp),
        "FOR": frac(fn, fn + tn), "TS": frac(tp, tp + fn + fp),
        "STP": frac(tp + fp, tp + fp + tn + fn), "ACC": frac(tp + tn, tp + fp + tn + fn), "F1": f1,
    }


def level_table(**levels):
    """Level -> metric dict holding one metric value per level"""
    return {level: {MetricId.STP: value} for level, value in levels.items()}


class TestClassify:

    def test_cutoff_is_inclusive(self):
        assert classify([0.5, 0.49], ["a", "a"], {"a": 0.5}).tolist() == [1, 0]

    def test_per_subgroup_cutoffs(self):
        assert classify([0.6, 0.6], ["a", "b"], CutoffMap({"a": 0.5, "b": 0.7})).tolist() == [1, 0]

    def test_missing_level(self):
        with pytest.raises(ValidationError):
            classify([0.6], ["c"], {"a": 0.5})


class TestConfusion:

    def test_hand_enumeration(self):
        counts = confusion_by_subgroup([1, 0, 1, 0], [1, 0, 0, 1], {"a": np.arange(4)})
        assert counts["a"] == Confusion(tp=1, fp=1, tn=1, fn=1)

    def test_perfect_classifier(self):
        y = np.array([1, 0, 1, 1, 0, 0])
        counts = confusion_by_subgroup(y, y, {"a": np.arange(3), "b": np.arange(3, 6)})
        assert all(c.fp == 0 and c.fn == 0 for c in counts.values())

    def test_counts_conserve_subgroup_sizes(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            n = int(rng.integers(4, 80))
            levels = rng.choice(["a", "b", "c"], size=n)
            levels[:2] = ["a", "b"]
            d = make_dataset(rng.integers(0, 2, n), levels, {"m": rng.random(n)})
            partition = partition_subgroups(d)
            y_pred = classify(d.scores["m"], d.protected, default_cutoffs(d))
            for level, c in confusion_by_subgroup(d.y_true, y_pred, partition).items():
                assert c.total == len(partition[level])


class TestMetricFromCounts:

    def test_examples(self):
        assert metric_from_counts(Confusion(tp=1, fp=0, tn=0, fn=1), MetricId.TPR) == 0.5
        assert metric_from_counts(Confusion(tp=0, fp=0, tn=3, fn=1), MetricId.PPV) is None
        c = Confusion(tp=3, fp=1, tn=4, fn=2)
        assert metric_from_counts(c, "STP") == 0.4
        assert metric_from_counts(c, "ACC") == 0.7
        assert metric_from_counts(c, "TS") == 0.5

    def test_matches_hand_formulas(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            tp, fp, tn, fn = (int(v) for v in rng.integers(0, 6, size=4))
            if tp + fp + tn + fn == 0:
                continue
            values = metric_values(Confusion(tp=tp, fp=fp, tn=tn, fn=fn))
            expected = hand_metrics(tp, fp, tn, fn)
            for metric in ALL_METRICS:
                assert values[metric] == expected[metric.value], (metric, tp, fp, tn, fn)

    def test_complement_identities(self):
        rng = np.random.default_rng(12)
        pairs = [("FNR", "TPR"), ("FPR", "TNR"), ("FDR", "PPV"), ("FOR", "NPV")]
        for _ in range(1000):
            tp, fp, tn, fn = (int(v) for v in rng.integers(0, 20, size=4))
            if tp + fp + tn + fn == 0:
                continue
            values = metric_values(Confusion(tp=tp, fp=fp, tn=tn, fn=fn))
            for left, right in pairs:
                a, b = values[MetricId(left)], values[MetricId(right)]
                assert (a is None) == (b is None)
                if a is not None:
                    assert abs(a - (1.0 - b)) <= 1e-15
                    assert 0.0 <= a <= 1.0

    def test_f1_undefined_when_both_zero(self):
        assert metric_from_counts(Confusion(tp=0, fp=2, tn=1, fn=3), MetricId.F1) is None


class TestGroupMetricTable:

    def test_duplicated_scores_give_identical_tables(self):
        s = [0.9, 0.2, 0.6, 0.4]
        d = make_dataset([1, 0, 1, 0], ["a", "b", "a", "b"], {"m1": s, "m2": s})
        t = group_metric_table(d, default_cutoffs(d))
        assert t.for_model("m1") == t.for_model("m2")

    def test_subgroup_without_positives(self):
        d = make_dataset([1, 0, 0, 0], ["a", "a", "b", "b"], {"m": [0.9, 0.1, 0.6, 0.2]})
        values = group_metric_table(d, default_cutoffs(d)).for_model("m")
        assert values["b"][MetricId.TPR] is None
        assert values["b"][MetricId.FNR] is None
        assert values["a"][MetricId.TPR] == 1.0

    def test_invariant_under_row_permutation(self):
        rng = np.random.default_rng(5)
        n = 40
        levels = np.array(["a", "b"] * (n // 2))
        d = make_dataset(rng.integers(0, 2, n), levels, {"m": rng.random(n)})
        order = rng.permutation(n)
        shuffled = d.take(order)
        assert group_metric_table(d, default_cutoffs(d)).values == group_metric_table(shuffled, default_cutoffs(d)).values

    def test_long_frame(self, balanced):
        frame = group_metric_table(balanced, default_cutoffs(balanced)).to_frame()
        assert len(frame) == 2 * len(ALL_METRICS)
        assert set(frame["subgroup"]) == {"a", "b"}


class TestRatiosAndParityLoss:

    def test_ratio_examples(self):
        spec = ProtectedSpec("a", ("b",))
        assert metric_ratios(level_table(a=0.5, b=0.4), spec, "STP")["b"] == pytest.approx(0.8)
        assert metric_ratios(level_table(a=0.5, b=0.5), spec, "STP")["b"] == 1.0
        assert metric_ratios(level_table(a=0.0, b=0.5), spec, "STP")["b"] is None
        assert subgroup_ratio(None, 0.5) is None

    def test_parity_loss_examples(self):
        assert parity_loss(level_table(a=0.5, b=0.5), ProtectedSpec("a", ("b",)), "STP") == 0.0
        assert parity_loss(level_table(a=0.5, b=0.25), ProtectedSpec("a", ("b",)), "STP") == pytest.approx(0.693147, abs=1e-6)
        three = level_table(a=0.4, b=0.2, c=0.8)
        assert parity_loss(three, ProtectedSpec("a", ("b", "c")), "STP") == pytest.approx(1.386294, abs=1e-6)

    def test_zero_or_undefined_ratio(self):
        spec = ProtectedSpec("a", ("b",))
        assert parity_loss(level_table(a=0.5, b=0.0), spec, "STP") is None
        assert parity_loss(level_table(a=0.5, b=None), spec, "STP") is None

    def test_identities_on_random_tables(self):
        rng = np.random.default_rng(21)
        for _ in range(500):
            a, b, c = (float(v) for v in rng.uniform(0.01, 1.0, size=3))
            two = level_table(a=a, b=b)
            forward = parity_loss(two, ProtectedSpec("a", ("b",)), "STP")
            inverse = parity_loss(two, ProtectedSpec("b", ("a",)), "STP")
            assert abs(forward - inverse) <= 1e-12

            three = level_table(a=a, b=b, c=c)
            total = parity_loss(three, ProtectedSpec("a", ("b", "c")), "STP")
            parts = parity_loss(three, ProtectedSpec("a", ("b",)), "STP") + parity_loss(three, ProtectedSpec("a", ("c",)), "STP")
            assert abs(total - parts) <= 1e-12

            same = level_table(a=a, b=a)
            assert parity_loss(same, ProtectedSpec("a", ("b",)), "STP") == 0.0
            assert (forward == 0.0) == (a == b)

    def test_parity_losses_from_table(self, skewed, spec_ab):
        t = group_metric_table(skewed, default_cutoffs(skewed))
        losses = parity_losses(t, spec_ab, ALL_METRICS, model="m")
        assert losses[MetricId.TPR] is None
        assert losses[MetricId.ACC] == pytest.approx(math.log(1.5))

    def test_summed_loss_skips_undefined(self):
        losses = {MetricId.TPR: 0.5, MetricId.PPV: None, MetricId.STP: 0.25}
        total, skipped = summed_parity_loss(losses, (MetricId.TPR, MetricId.PPV, MetricId.STP))
        assert total == 0.75
        assert skipped == 1


class TestPooledPerformance:

    def test_perfect_classifier(self):
        perf = pooled_performance([0, 1, 1, 0], [0, 1, 1, 0], [0.1, 0.9, 0.8, 0.3])
        assert perf == {"accuracy": 1.0, "f1": 1.0, "auc": 1.0}

    def test_single_class_auc_is_undefined(self):
        assert pooled_performance([1, 1], [1, 0], [0.9, 0.2])["auc"] is None
