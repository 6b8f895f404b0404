#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Group Fairness Metrics Module

Confusion matrices per protected subgroup, the twelve confusion-matrix
metrics, subgroup ratios and parity loss. An undefined metric (zero
denominator) is represented by None and is never coerced to a number.
"""

import enum
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, NamedTuple, Optional

import numpy as np
import pandas as pd
from sklearn.metrics import confusion_matrix

from app.ai.logistic import auc
from app.data.dataset import check_same_rows, partition_subgroups
from app.utils.errors import ValidationError

logger = logging.getLogger(__name__)


class MetricId(str, enum.Enum):
    """Confusion-matrix based fairness metrics"""

    TPR = "TPR"
    TNR = "TNR"
    PPV = "PPV"
    NPV = "NPV"
    FNR = "FNR"
    FPR = "FPR"
    FDR = "FDR"
    FOR = "FOR"
    TS = "TS"
    STP = "STP"
    ACC = "ACC"
    F1 = "F1"

    @classmethod
    def parse(cls, names):
        """Parse metric names, raising on unknown ones"""
        metrics = []
        for name in names:
            key = str(name).strip().upper()
            if key not in cls.__members__:
                raise ValidationError(f"Unknown metric '{name}', valid metrics: {', '.join(cls.__members__)}")
            metrics.append(cls[key])
        return tuple(dict.fromkeys(metrics))


ALL_METRICS = tuple(MetricId)

# The five checks and the fairness criterion each one tests
CHECK_CRITERIA = {
    MetricId.TPR: "Equal opportunity",
    MetricId.PPV: "Predictive parity",
    MetricId.FPR: "Predictive equality",
    MetricId.STP: "Statistical parity",
    MetricId.ACC: "Accuracy equality",
}
CHECK_METRICS = tuple(CHECK_CRITERIA)


@dataclass(frozen=True)
class Confusion:
    """Confusion matrix counts of one subgroup"""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


class LossSum(NamedTuple):
    total: float
    skipped: int


def _ratio(numerator, denominator):
    return Fraction(numerator, denominator) if denominator else None


def _exact_metrics(c):
    """Evaluate every metric as an exact fraction (None when undefined)"""
    tpr = _ratio(c.tp, c.tp + c.fn)
    ppv = _ratio(c.tp, c.tp + c.fp)
    if tpr is None or ppv is None or ppv + tpr == 0:
        f1 = None
    else:
        f1 = 2 * ppv * tpr / (ppv + tpr)

    return {
        MetricId.TPR: tpr,
        MetricId.TNR: _ratio(c.tn, c.tn + c.fp),
        MetricId.PPV: ppv,
        MetricId.NPV: _ratio(c.tn, c.tn + c.fn),
        MetricId.FNR: _ratio(c.fn, c.fn + c.tp),
        MetricId.FPR: _ratio(c.fp, c.fp + c.tn),
        MetricId.FDR: _ratio(c.fp, c.fp + c.tp),
        MetricId.FOR: _ratio(c.fn, c.fn + c.tn),
        MetricId.TS: _ratio(c.tp, c.tp + c.fn + c.fp),
        MetricId.STP: _ratio(c.tp + c.fp, c.total),
        MetricId.ACC: _ratio(c.tp + c.tn, c.total),
        MetricId.F1: f1,
    }


def metric_values(c):
    """All twelve metrics of one subgroup, rounded once to float"""
    return {metric: None if value is None else float(value) for metric, value in _exact_metrics(c).items()}


def metric_from_counts(c, metric):
    """Evaluate one metric from confusion counts"""
    return metric_values(c)[MetricId(metric)]


def classify(scores, protected, cutoffs):
    """Predict 1 where a score reaches its subgroup's cutoff"""
    scores = np.asarray(scores, dtype=np.float64)
    protected = np.asarray(protected, dtype=object)
    check_same_rows([len(scores), len(protected)])

    missing = sorted(set(protected.tolist()) - set(cutoffs))
    if missing:
        raise ValidationError(f"No cutoff for levels: {', '.join(map(str, missing))}")

    thresholds = np.array([cutoffs[level] for level in protected], dtype=np.float64)
    return (scores >= thresholds).astype(np.int64)


def confusion_by_subgroup(y_true, y_pred, partition):
    """Count TP, FP, TN and FN within every subgroup"""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    check_same_rows([len(y_true), len(y_pred)])

    result = {}
    for level, rows in partition.items():
        tn, fp, fn, tp = confusion_matrix(y_true[rows], y_pred[rows], labels=[0, 1]).ravel()
        result[level] = Confusion(tp=int(tp), fp=int(fp), tn=int(tn), fn=int(fn))
    return result


@dataclass(frozen=True)
class GroupMetricTable:
    """Metric values per model, subgroup and metric"""

    values: Dict[str, Dict[str, Dict[MetricId, Optional[float]]]]
    confusion: Dict[str, Dict[str, Confusion]]

    @property
    def models(self):
        return list(self.values)

    def for_model(self, model=None):
        """Per-level metric values of one model"""
        if model is None:
            if len(self.values) != 1:
                raise ValidationError("Table holds several models, name one")
            model = next(iter(self.values))
        if model not in self.values:
            raise ValidationError(f"Unknown model '{model}', available: {', '.join(self.values)}")
        return self.values[model]

    def to_frame(self):
        """Long-format frame with one row per model, subgroup and metric"""
        rows = [
            {"model": model, "subgroup": level, "metric": metric.value, "value": value}
            for model, levels in self.values.items()
            for level, metrics in levels.items()
            for metric, value in metrics.items()
        ]
        return pd.DataFrame(rows, columns=["model", "subgroup", "metric", "value"])


def model_metric_values(d, model, cutoffs, partition=None):
    """Metric values and confusion counts of one model's scores"""
    if model not in d.scores:
        raise ValidationError(f"Unknown model '{model}', available: {', '.join(d.model_labels)}")
    partition = partition if partition is not None else partition_subgroups(d)

    y_pred = classify(d.scores[model], d.protected, cutoffs)
    confusion = confusion_by_subgroup(d.y_true, y_pred, partition)
    return {level: metric_values(c) for level, c in confusion.items()}, confusion


def group_metric_table(d, cutoffs):
    """Metric table for every model, subgroup and metric"""
    partition = partition_subgroups(d)
    values, confusion = {}, {}
    for model in d.model_labels:
        values[model], confusion[model] = model_metric_values(d, model, cutoffs, partition)
    return GroupMetricTable(values=values, confusion=confusion)


def _level_values(t, model):
    return t.for_model(model) if isinstance(t, GroupMetricTable) else t


def subgroup_ratio(unprivileged, privileged):
    """Ratio of two metric values, None when undefined"""
    if unprivileged is None or privileged is None or privileged == 0:
        return None
    return unprivileged / privileged


def metric_ratios(t, spec, metric, model=None):
    """Each unprivileged level's metric divided by the privileged level's"""
    values = _level_values(t, model)
    metric = MetricId(metric)
    privileged = values[spec.privileged][metric]
    return {level: subgroup_ratio(values[level][metric], privileged) for level in spec.unprivileged}


def parity_loss(t, spec, metric, model=None):
    """Sum over unprivileged levels of |ln(ratio)|, None when any ratio is undefined or 0"""
    ratios = metric_ratios(t, spec, metric, model)
    if any(r is None or r == 0 for r in ratios.values()):
        return None
    return sum(abs(math.log(r)) for r in ratios.values())


def parity_losses(t, spec, metrics=ALL_METRICS, model=None):
    """Parity loss for each requested metric"""
    values = _level_values(t, model)
    return {metric: parity_loss(values, spec, metric) for metric in metrics}


def summed_parity_loss(losses, metrics):
    """Sum defined parity losses in metric order, counting undefined ones"""
    total, skipped = 0.0, 0
    for metric in metrics:
        value = losses[metric]
        if value is None:
            skipped += 1
        else:
            total += value
    return LossSum(total=total, skipped=skipped)


def pooled_performance(y_true, y_pred, scores):
    """Accuracy, F1 and AUC over all rows pooled"""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    tn, fp, fn, tp = confusion_matrix(y_true, y_pred, labels=[0, 1]).ravel()
    pooled = metric_values(Confusion(tp=int(tp), fp=int(fp), tn=int(tn), fn=int(fn)))

    try:
        area = auc(scores, y_true)
    except ValidationError:
        area = None

    return {"accuracy": pooled[MetricId.ACC], "f1": pooled[MetricId.F1], "auc": area}
