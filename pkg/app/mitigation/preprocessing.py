#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Pre-processing Bias Mitigation Module

Reweighting, uniform and preferential resampling, and the disparate impact
remover (geometric repair of a numeric feature).
"""

import enum
import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from app.data.dataset import check_same_rows
from app.utils.errors import ParameterError, SchemaError, ValidationError

logger = logging.getLogger(__name__)

WEIGHTS_COLUMN = "_weights_"
MIN_QUANTILE_GRID = 1000


class ResampleMode(str, enum.Enum):
    UNIFORM = "uniform"
    PREFERENTIAL = "preferential"


class PreprocessMethod(str, enum.Enum):
    REWEIGHT = "reweight"
    RESAMPLE_UNIFORM = "resample_uniform"
    RESAMPLE_PREFERENTIAL = "resample_preferential"
    DISPARATE_IMPACT_REMOVER = "disparate_impact_remover"


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Per-row weights and the per-(subgroup, label) cell weights they come from"""

    weights: np.ndarray
    cell_weights: Dict[Tuple[str, int], float]


@dataclass(frozen=True)
class CellPlan:
    original: int
    target: int


@dataclass(frozen=True, eq=False)
class ResamplePlan:
    """Target cell sizes and the resulting row-index multiset"""

    cells: Dict[Tuple[str, int], CellPlan]
    indices: np.ndarray

    @property
    def is_identity(self):
        return np.array_equal(self.indices, np.arange(len(self.indices))) and all(
            cell.original == cell.target for cell in self.cells.values()
        )


@dataclass(frozen=True, eq=False)
class RepairedFeature:
    values: np.ndarray
    lam: float


def _cells(protected, y_true):
    """Row indices of every (subgroup, label) cell, validated non-empty"""
    protected = np.asarray([str(level) for level in protected], dtype=object)
    y_true = np.asarray(y_true, dtype=np.int64)
    check_same_rows([len(protected), len(y_true)])
    if not np.isin(y_true, (0, 1)).all():
        raise ValidationError("y_true must contain only 0 and 1")

    cells = {}
    for level in sorted(set(protected.tolist())):
        for label in (0, 1):
            rows = np.flatnonzero((protected == level) & (y_true == label))
            if len(rows) == 0:
                raise ValidationError(
                    f"Cell (subgroup '{level}', label {label}) is empty, its weight is undefined"
                )
            cells[(level, label)] = rows
    return cells, protected, y_true


def reweight(protected, y_true, spec=None):
    """Weights n_s * n_y / (N * n_sy) that equalize favorable rates across subgroups"""
    cells, protected, y_true = _cells(protected, y_true)
    if spec is not None and set(spec.levels) != {level for level, _ in cells}:
        raise ValidationError("Protected levels do not match the privileged and unprivileged levels")

    total = len(y_true)
    weights = np.empty(total, dtype=np.float64)
    cell_weights = {}
    for (level, label), rows in cells.items():
        n_s = int(np.count_nonzero(protected == level))
        n_y = int(np.count_nonzero(y_true == label))
        weight = (n_s * n_y) / (total * len(rows))
        cell_weights[(level, label)] = weight
        weights[rows] = weight

    return WeightVector(weights=weights, cell_weights=cell_weights)


def _target_count(n_s, n_y, total):
    # Half-up rounding of n_s * n_y / N in integer arithmetic
    return (2 * n_s * n_y + total) // (2 * total)


def _borderline_order(rows, ranker, cutoff):
    distance = np.abs(ranker[rows] - cutoff)
    return rows[np.lexsort((rows, distance))]


def resample(protected, y_true, mode, ranker_scores=None, cutoff=0.5, seed=42):
    """Plan duplicated or dropped rows so each cell reaches round(w * n) rows"""
    mode = ResampleMode(mode)
    cells, protected, y_true = _cells(protected, y_true)

    ranker = None
    if mode is ResampleMode.PREFERENTIAL:
        if ranker_scores is None:
            raise ValidationError("Preferential resampling needs ranker scores")
        ranker = np.asarray(ranker_scores, dtype=np.float64)
        check_same_rows([len(ranker), len(y_true)])
        if not (np.isfinite(ranker).all() and (ranker >= 0).all() and (ranker <= 1).all()):
            raise ValidationError("Ranker scores must lie in [0, 1]")

    rng = np.random.default_rng(seed)
    total = len(y_true)
    plans, chosen = {}, []
    for (level, label), rows in cells.items():
        n_s = int(np.count_nonzero(protected == level))
        n_y = int(np.count_nonzero(y_true == label))
        target = _target_count(n_s, n_y, total)
        plans[(level, label)] = CellPlan(original=len(rows), target=target)

        if target == len(rows):
            chosen.append(rows)
        elif mode is ResampleMode.UNIFORM:
            if target > len(rows):
                extra = rng.choice(rows, size=target - len(rows), replace=True)
                chosen.append(np.concatenate([rows, extra]))
            else:
                chosen.append(rng.choice(rows, size=target, replace=False))
        else:
            # Most borderline rows are duplicated or dropped first
            order = _borderline_order(rows, ranker, cutoff)
            if target > len(rows):
                extra = np.resize(order, target - len(rows))
                chosen.append(np.concatenate([rows, extra]))
            else:
                chosen.append(order[len(rows) - target:])

    indices = np.sort(np.concatenate(chosen)) if chosen else np.empty(0, dtype=np.int64)
    return ResamplePlan(cells=plans, indices=indices.astype(np.int64))


def _as_numeric(feature):
    try:
        values = pd.to_numeric(pd.Series(feature), errors="raise").to_numpy(dtype=np.float64)
    except (ValueError, TypeError):
        raise ValidationError("Disparate impact remover works on numeric features only")
    if not np.isfinite(values).all():
        raise ValidationError("Feature contains non-finite values")
    return values


def repair_feature(feature, protected, lam):
    """Geometric repair: move each subgroup's quantiles toward the per-quantile median"""
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ParameterError(f"lambda must lie in [0, 1], got {lam}")

    values = _as_numeric(feature)
    protected = np.asarray([str(level) for level in protected], dtype=object)
    check_same_rows([len(values), len(protected)])

    levels = sorted(set(protected.tolist()))
    grid_size = max(MIN_QUANTILE_GRID, len(values))
    k = np.arange(1, grid_size + 1, dtype=np.int64)

    # Quantile functions of every subgroup on the grid k / K
    groups, quantiles = {}, []
    for level in levels:
        rows = np.flatnonzero(protected == level)
        ordered = np.sort(values[rows])
        n = len(ordered)
        quantiles.append(ordered[(k * n + grid_size - 1) // grid_size - 1])
        groups[level] = rows
    target = np.median(np.vstack(quantiles), axis=0)

    repaired = values.copy()
    for level, rows in groups.items():
        n = len(rows)
        # Average ranks are half-integers; doubling keeps the snap exact
        doubled_ranks = np.rint(2 * pd.Series(values[rows]).rank(method="average").to_numpy()).astype(np.int64)
        grid_index = (doubled_ranks * grid_size) // (2 * n)
        repaired[rows] = (1.0 - lam) * values[rows] + lam * target[grid_index - 1]

    return RepairedFeature(values=repaired, lam=lam)


def pre_process_data(d, method, **params):
    """Apply a pre-processing method and return the transformed dataset"""
    try:
        method = PreprocessMethod(method)
    except ValueError:
        raise ValidationError(
            f"Unknown method '{method}', valid methods: {', '.join(m.value for m in PreprocessMethod)}"
        )

    if method is PreprocessMethod.REWEIGHT:
        weights = reweight(d.protected, d.y_true, params.get("spec"))
        logger.info(f"Reweighted {d.row_count} rows into {len(weights.cell_weights)} cells")
        return d.with_feature(WEIGHTS_COLUMN, weights.weights)

    if method in (PreprocessMethod.RESAMPLE_UNIFORM, PreprocessMethod.RESAMPLE_PREFERENTIAL):
        mode = ResampleMode.UNIFORM if method is PreprocessMethod.RESAMPLE_UNIFORM else ResampleMode.PREFERENTIAL
        ranker = params.get("ranker")
        if isinstance(ranker, str):
            if ranker not in d.scores:
                raise ValidationError(f"Unknown ranker model '{ranker}', available: {', '.join(d.model_labels)}")
            ranker = d.scores[ranker]
        plan = resample(
            d.protected, d.y_true, mode,
            ranker_scores=ranker,
            cutoff=params.get("cutoff", 0.5),
            seed=params.get("seed", 42),
        )
        logger.info(f"Resampled {d.row_count} rows into {len(plan.indices)} ({mode.value})")
        return d.take(plan.indices)

    feature = params.get("feature")
    if feature is None or feature not in d.features.columns:
        raise SchemaError(f"Unknown feature '{feature}', available: {', '.join(d.features.columns)}")
    if "lam" not in params:
        raise ValidationError("Disparate impact remover needs lambda")
    repaired = repair_feature(d.features[feature], d.protected, params["lam"])
    logger.info(f"Repaired feature '{feature}' with lambda {repaired.lam}")
    return d.with_feature(feature, repaired.values)
