#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Post-processing Bias Mitigation Module
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.data.dataset import CutoffMap, check_same_rows, default_cutoffs, partition_subgroups
from app.fairness.metrics import MetricId, model_metric_values, parity_losses, summed_parity_loss
from app.utils.errors import ParameterError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_GRID_STEP = 0.01


@dataclass(frozen=True)
class PivotParams:
    """Radius and centre of the critical region"""

    theta: float
    cutoff: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ParameterError(f"theta must lie in (0, 1), got {self.theta}")
        if not 0.0 < self.cutoff < 1.0:
            raise ParameterError(f"cutoff must lie in (0, 1), got {self.cutoff}")

    @property
    def region(self):
        """Open critical region intersected with the unit interval"""
        return max(0.0, self.cutoff - self.theta), min(1.0, self.cutoff + self.theta)


def roc_pivot(scores, protected, spec, params):
    """Mirror borderline scores across the cutoff in favor of unprivileged rows"""
    scores = np.asarray(scores, dtype=np.float64)
    protected = np.asarray(protected, dtype=object)
    check_same_rows([len(scores), len(protected)])
    if not (np.isfinite(scores).all() and (scores >= 0).all() and (scores <= 1).all()):
        raise ValidationError("scores must lie in [0, 1]")

    cutoff, theta = params.cutoff, params.theta
    in_region = (scores > cutoff - theta) & (scores < cutoff + theta)
    privileged = protected == spec.privileged

    # Privileged rows on the favorable side move down, unprivileged rows below move up
    flip = in_region & ((privileged & (scores >= cutoff)) | (~privileged & (scores < cutoff)))
    adjusted = scores.copy()
    adjusted[flip] = np.clip(2.0 * cutoff - scores[flip], 0.0, 1.0)

    logger.info(f"roc_pivot changed {int(np.count_nonzero(adjusted != scores))} of {len(scores)} scores")
    return adjusted


def default_grid(step=DEFAULT_GRID_STEP):
    """Cutoffs step, 2*step, ... strictly below 1"""
    if not 0.0 < step <= 0.5:
        raise ParameterError(f"grid step must lie in (0, 0.5], got {step}")
    count = int(round(1.0 / step))
    grid = [round(k * step, 10) for k in range(1, count + 1)]
    return [c for c in grid if 0.0 < c < 1.0]


@dataclass(frozen=True)
class SweepPoint:
    """Parity losses at one grid cutoff"""

    cutoff: float
    losses: Dict[MetricId, Optional[float]]
    total: float
    skipped: int

    @property
    def defined_count(self):
        return len(self.losses) - self.skipped


def sweep_parity_loss(d, spec, model, metrics, grid=None, subgroup=None, cutoffs=None):
    """Evaluate parity losses over a cutoff grid

    With subgroup None every subgroup shares the grid cutoff; otherwise only
    that subgroup's cutoff moves and the others keep their current values.
    """
    metrics = tuple(MetricId(m) for m in metrics)
    if not metrics:
        raise ValidationError("At least one metric is required")
    if model not in d.scores:
        raise ValidationError(f"Unknown model '{model}', available: {', '.join(d.model_labels)}")
    if subgroup is not None and subgroup not in d.levels:
        raise ValidationError(f"Unknown subgroup '{subgroup}', available: {', '.join(d.levels)}")

    grid = list(grid) if grid is not None else default_grid()
    cutoffs = cutoffs if cutoffs is not None else default_cutoffs(d)
    partition = partition_subgroups(d)

    points = []
    for cutoff in grid:
        if subgroup is None:
            current = CutoffMap({level: cutoff for level in d.levels})
        else:
            current = cutoffs.replace(subgroup, cutoff)
        level_values, _ = model_metric_values(d, model, current, partition)
        losses = parity_losses(level_values, spec, metrics)
        total, skipped = summed_parity_loss(losses, metrics)
        points.append(SweepPoint(cutoff=float(cutoff), losses=losses, total=total, skipped=skipped))
    return points


@dataclass(frozen=True)
class CutoffSearchResult:
    """Outcome of a ceteris paribus cutoff search for one subgroup"""

    model: str
    subgroup: str
    metrics: Tuple[MetricId, ...]
    points: List[SweepPoint]
    best_cutoff: float
    best_loss: float
    best_skipped: int

    @property
    def grid(self):
        return [point.cutoff for point in self.points]


def best_point(points):
    """Lowest summed loss among points with the most defined metrics; ties go to the smallest cutoff"""
    most_defined = max(point.defined_count for point in points)
    candidates = [point for point in points if point.defined_count == most_defined]
    return min(candidates, key=lambda point: (point.total, point.cutoff))


def cutoff_search(d, spec, model, subgroup, metrics, grid=None, cutoffs=None):
    """Exhaustive search of one subgroup's cutoff minimizing summed parity loss"""
    if subgroup is None:
        raise ValidationError("cutoff_search needs a subgroup")
    points = sweep_parity_loss(d, spec, model, metrics, grid=grid, subgroup=subgroup, cutoffs=cutoffs)
    if not points:
        raise ValidationError("Cutoff grid is empty")

    best = best_point(points)
    logger.info(f"{model}: best cutoff for '{subgroup}' is {best.cutoff} with loss {best.total:.6f}")
    return CutoffSearchResult(
        model=model,
        subgroup=subgroup,
        metrics=tuple(MetricId(m) for m in metrics),
        points=points,
        best_cutoff=best.cutoff,
        best_loss=best.total,
        best_skipped=best.skipped,
    )
