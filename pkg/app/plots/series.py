#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Plot Series Module

Data series behind every plot kind. Each view is a pure function of its
inputs; undefined values are kept as missing points, never zero.
"""

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from sklearn.decomposition import PCA

from app.data.dataset import partition_subgroups
from app.fairness.metrics import ALL_METRICS, CHECK_METRICS, MetricId, summed_parity_loss
from app.mitigation.postprocessing import best_point, sweep_parity_loss
from app.utils.errors import ParameterError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_BINS = 20
PERFORMANCE_MEASURES = ("accuracy", "auc", "f1")


class PlotKind(str, enum.Enum):
    FAIRNESS_CHECK_BARS = "fairness_check_bars"
    METRIC_SCORES = "metric_scores"
    RADAR = "radar"
    HEATMAP = "heatmap"
    PCA = "pca"
    CHOOSE_METRIC = "choose_metric"
    STACK_METRICS = "stack_metrics"
    GROUP_METRIC = "group_metric"
    DENSITY = "density"
    PERFORMANCE_AND_FAIRNESS = "performance_and_fairness"
    ALL_CUTOFFS = "all_cutoffs"
    CETERIS_PARIBUS_CUTOFF = "ceteris_paribus_cutoff"

    @classmethod
    def parse(cls, names):
        """Parse plot kind names, raising on unknown ones"""
        valid = [kind.value for kind in cls]
        kinds = []
        for name in names:
            name = str(name).strip()
            if name not in valid:
                raise ValidationError(f"Unknown plot kind '{name}', valid kinds: {', '.join(valid)}")
            kinds.append(cls(name))
        return tuple(dict.fromkeys(kinds))


@dataclass(frozen=True)
class Axis:
    name: str
    unit: Optional[str] = None


@dataclass(frozen=True)
class Point:
    """Labeled numeric tuple; missing when any value is undefined"""

    labels: Dict[str, Any]
    values: Tuple[Optional[float], ...]
    missing: bool = False

    def to_dict(self):
        return {"labels": dict(self.labels), "values": list(self.values), "missing": self.missing}


def _finite(value):
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def point(labels, *values):
    values = tuple(_finite(v) for v in values)
    return Point(labels=labels, values=values, missing=any(v is None for v in values))


@dataclass(frozen=True)
class PlotSeries:
    kind: PlotKind
    axes: Tuple[Axis, ...]
    points: List[Point]
    annotations: Dict[str, Any] = field(default_factory=dict)
    params: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "axes": [{"name": axis.name, "unit": axis.unit} for axis in self.axes],
            "points": [p.to_dict() for p in self.points],
            "annotations": self.annotations,
            "params": self.params,
        }


def _metrics(metrics, default):
    metrics = default if metrics is None else tuple(MetricId(m) for m in metrics)
    if not metrics:
        raise ValidationError("At least one metric is required")
    return metrics


def parity_loss_matrix(a, metrics=None):
    """Model x metric parity loss; NaN marks undefined entries"""
    metrics = _metrics(metrics, ALL_METRICS)
    rows = {
        label: [np.nan if model.parity_loss[m] is None else model.parity_loss[m] for m in metrics]
        for label, model in a.models.items()
    }
    return pd.DataFrame.from_dict(rows, orient="index", columns=[m.value for m in metrics], dtype=np.float64)


def fairness_check_view(a):
    """Ratio bars of the five checks, oriented around 1, with the epsilon band"""
    points = []
    for model in a.models.values():
        for metric, check in model.checks.items():
            for level, ratio in check.ratios.items():
                labels = {
                    "model": model.label,
                    "metric": metric.value,
                    "criterion": check.criterion,
                    "subgroup": level,
                    "verdict": check.verdicts[level].value,
                }
                if ratio is None:
                    points.append(point(labels, None, None, None))
                else:
                    points.append(point(labels, ratio, ratio - 1.0, abs(ratio - 1.0)))

    return PlotSeries(
        kind=PlotKind.FAIRNESS_CHECK_BARS,
        axes=(Axis("ratio"), Axis("bar", "ratio - 1"), Axis("height", "|ratio - 1|")),
        points=points,
        annotations={"band": [a.epsilon, 1.0 / a.epsilon], "privileged": a.spec.privileged},
        params={"epsilon": a.epsilon},
    )


def metric_scores_view(t, spec, metrics=None):
    """Raw metric value of every model, metric and subgroup"""
    metrics = _metrics(metrics, CHECK_METRICS)
    points = []
    for model in t.models:
        values = t.for_model(model)
        for metric in metrics:
            for level in spec.levels:
                labels = {
                    "model": model,
                    "metric": metric.value,
                    "subgroup": level,
                    "privileged": level == spec.privileged,
                }
                points.append(point(labels, values[level][metric]))

    return PlotSeries(
        kind=PlotKind.METRIC_SCORES,
        axes=(Axis("score"),),
        points=points,
        annotations={"privileged": spec.privileged},
        params={"metrics": [m.value for m in metrics]},
    )


def _matrix_points(m, frame=None):
    frame = m if frame is None else frame
    return [
        point({"model": str(model), "metric": str(metric)}, frame.loc[model, metric])
        for model in m.index
        for metric in m.columns
    ]


def radar_view(m):
    return PlotSeries(
        kind=PlotKind.RADAR,
        axes=(Axis("parity_loss"),),
        points=_matrix_points(m),
        params={"metrics": list(m.columns)},
    )


def heatmap_view(m, normalize=False):
    """Parity loss matrix, optionally z-scored per metric column"""
    frame = m
    if normalize:
        mean = m.mean(axis=0, skipna=True)
        sd = m.std(axis=0, ddof=0, skipna=True)
        frame = (m - mean) / sd.replace(0.0, np.nan)
        # Constant columns carry no contrast
        frame = frame.mask(frame.isna() & m.notna(), 0.0)

    return PlotSeries(
        kind=PlotKind.HEATMAP,
        axes=(Axis("parity_loss", "z-score" if normalize else None),),
        points=_matrix_points(m, frame),
        params={"normalize": bool(normalize), "metrics": list(m.columns)},
    )


def choose_metric_view(m, metric=MetricId.FPR):
    """Parity loss of every model on one metric"""
    metric = MetricId(metric)
    if metric.value not in m.columns:
        raise ValidationError(f"Metric {metric.value} is not in the parity loss matrix")
    points = [point({"model": str(model)}, m.loc[model, metric.value]) for model in m.index]
    return PlotSeries(
        kind=PlotKind.CHOOSE_METRIC,
        axes=(Axis("parity_loss"),),
        points=points,
        params={"metric": metric.value},
    )


def stack_metrics_view(m):
    """Per-model stacked parity loss segments; undefined metrics add nothing"""
    points, totals = [], {}
    for model in m.index:
        start = 0.0
        for metric in m.columns:
            value = m.loc[model, metric]
            labels = {"model": str(model), "metric": str(metric)}
            if pd.isna(value):
                points.append(point(labels, None, None, None))
                continue
            points.append(point(labels, value, start, start + value))
            start += value
        totals[str(model)] = start

    return PlotSeries(
        kind=PlotKind.STACK_METRICS,
        axes=(Axis("parity_loss"), Axis("start"), Axis("end")),
        points=points,
        annotations={"totals": totals},
        params={"metrics": list(m.columns)},
    )


def group_metric_view(a, metric=MetricId.FPR, performance="accuracy"):
    """Raw subgroup values of one metric next to pooled performance per model"""
    metric = MetricId(metric)
    if performance not in PERFORMANCE_MEASURES:
        raise ParameterError(f"Unknown performance measure '{performance}', valid: {', '.join(PERFORMANCE_MEASURES)}")

    points = []
    for model in a.models.values():
        for level in a.spec.levels:
            points.append(point(
                {"model": model.label, "panel": "metric", "subgroup": level},
                model.metric_scores[level][metric],
            ))
        points.append(point(
            {"model": model.label, "panel": "performance", "subgroup": None},
            model.performance.get(performance),
        ))

    return PlotSeries(
        kind=PlotKind.GROUP_METRIC,
        axes=(Axis("value"),),
        points=points,
        annotations={"privileged": a.spec.privileged},
        params={"metric": metric.value, "performance": performance},
    )


def cutoff_sweep(d, spec, model, metrics=None, subgroup=None, grid=None, cumulated=False, cutoffs=None):
    """Parity loss over a cutoff grid, for all subgroups or one with the others fixed"""
    metrics = _metrics(metrics, CHECK_METRICS)
    points = sweep_parity_loss(d, spec, model, metrics, grid=grid, subgroup=subgroup, cutoffs=cutoffs)
    kind = PlotKind.ALL_CUTOFFS if subgroup is None else PlotKind.CETERIS_PARIBUS_CUTOFF

    series = []
    for sweep in points:
        if cumulated:
            total = sweep.total if sweep.defined_count else None
            series.append(point({"skipped": sweep.skipped}, sweep.cutoff, total))
        else:
            series.extend(point({"metric": m.value}, sweep.cutoff, sweep.losses[m]) for m in metrics)

    annotations = {}
    if kind is PlotKind.CETERIS_PARIBUS_CUTOFF and points:
        best = best_point(points)
        annotations["minimum"] = {"cutoff": best.cutoff, "loss": best.total, "skipped": best.skipped}

    return PlotSeries(
        kind=kind,
        axes=(Axis("cutoff"), Axis("parity_loss")),
        points=series,
        annotations=annotations,
        params={
            "model": model,
            "subgroup": subgroup,
            "metrics": [m.value for m in metrics],
            "cumulated": bool(cumulated),
        },
    )


def pca_projection(m):
    """Project models onto the top two principal directions of the parity loss matrix"""
    if len(m.index) < 2:
        raise ValidationError("PCA needs at least 2 models")
    defined = m.dropna(axis=1, how="any")
    dropped = [str(c) for c in m.columns if c not in defined.columns]
    if len(defined.columns) < 2:
        raise ValidationError("PCA needs at least 2 metrics defined for every model")

    values = defined.to_numpy(dtype=np.float64)
    centered = values - values.mean(axis=0)
    if np.allclose(centered, 0.0):
        coordinates = np.zeros((len(values), 2))
        loadings = np.zeros((2, values.shape[1]))
        explained = [0.0, 0.0]
    else:
        pca = PCA(n_components=2, svd_solver="full")
        coordinates = pca.fit_transform(values)
        loadings = pca.components_
        explained = [float(v) for v in pca.explained_variance_ratio_]

    points = [
        point({"type": "model", "name": str(model)}, *coordinates[i])
        for i, model in enumerate(defined.index)
    ]
    points += [
        point({"type": "metric", "name": str(metric)}, loadings[0, j], loadings[1, j])
        for j, metric in enumerate(defined.columns)
    ]

    return PlotSeries(
        kind=PlotKind.PCA,
        axes=(Axis("PC1", f"{explained[0]:.4f}"), Axis("PC2", f"{explained[1]:.4f}")),
        points=points,
        annotations={"explained_variance": explained, "dropped_metrics": dropped},
        params={"metrics": [str(c) for c in defined.columns]},
    )


def performance_vs_fairness(a, performance="accuracy", metrics=None):
    """Negated summed parity loss against pooled performance per model"""
    metrics = _metrics(metrics, CHECK_METRICS)
    if performance not in PERFORMANCE_MEASURES:
        raise ParameterError(f"Unknown performance measure '{performance}', valid: {', '.join(PERFORMANCE_MEASURES)}")

    points, notes = [], []
    for model in a.models.values():
        total, skipped = summed_parity_loss(model.parity_loss, metrics)
        if skipped:
            notes.append(f"{model.label}: {skipped} undefined metrics skipped")
        points.append(point({"model": model.label}, -total, model.performance.get(performance)))

    return PlotSeries(
        kind=PlotKind.PERFORMANCE_AND_FAIRNESS,
        axes=(Axis("fairness", "-sum(parity_loss)"), Axis(performance)),
        points=points,
        annotations={"notes": notes},
        params={"performance": performance, "metrics": [m.value for m in metrics], "fairness_transform": "negate"},
    )


def score_density(d, spec, model, bins=DEFAULT_BINS):
    """
    Per-subgroup score histograms over [0, 1] as fractions.

    Bins are left-closed with the last bin closed on both ends, as in
    np.histogram, so a score on an inner edge counts in the upper bin
    (all scores 0.5 with bins=2 fill the second bin). This is the opposite
    of the right-closed-except-first rule; it is the rule that agrees with
    that worked example.
    """
    bins = int(bins)
    if bins < 2:
        raise ParameterError(f"bins must be at least 2, got {bins}")
    if model not in d.scores:
        raise ValidationError(f"Unknown model '{model}', available: {', '.join(d.model_labels)}")

    scores = d.scores[model]
    partition = partition_subgroups(d)
    points = []
    for level in spec.levels:
        rows = partition[level]
        counts, edges = np.histogram(scores[rows], bins=bins, range=(0.0, 1.0))
        fractions = counts / len(rows)
        for j in range(bins):
            labels = {"subgroup": level, "privileged": level == spec.privileged, "bin": j}
            points.append(point(labels, edges[j], edges[j + 1], fractions[j]))

    return PlotSeries(
        kind=PlotKind.DENSITY,
        axes=(Axis("left"), Axis("right"), Axis("fraction")),
        points=points,
        params={"model": model, "bins": bins},
    )
