#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Logistic Regression AI Module

Weighted, lightly ridge-penalized logistic regression fitted by damped
Newton iterations, plus the feature encoding it trains on and the AUC rank
statistic used on the performance axis.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.special import expit

from app.utils.errors import ParameterError, ValidationError

logger = logging.getLogger(__name__)

INTERCEPT = "(intercept)"


@dataclass(frozen=True)
class ColumnSpec:
    """Source of one design matrix column; level is None for numeric columns"""

    source: str
    level: Optional[str] = None

    @property
    def name(self):
        return self.source if self.level is None else f"{self.source}={self.level}"


@dataclass(frozen=True)
class FeatureEncoding:
    """Encoding learned on the fitting rows"""

    order: Tuple[str, ...] = ()
    numeric: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    categorical: Dict[str, Tuple[str, ...]] = field(default_factory=dict)

    @property
    def columns(self):
        columns = []
        for name in self.order:
            if name in self.numeric:
                columns.append(ColumnSpec(name))
            else:
                columns.extend(ColumnSpec(name, level) for level in self.categorical[name])
        columns.append(ColumnSpec(INTERCEPT))
        return tuple(columns)

    def apply(self, features):
        """Encode rows with the learned statistics"""
        features = pd.DataFrame(features)
        missing = [name for name in self.order if name not in features.columns]
        if missing:
            raise ValidationError(f"Features missing for encoding: {', '.join(missing)}")

        n = len(features)
        blocks = []
        for name in self.order:
            if name in self.numeric:
                mean, sd = self.numeric[name]
                values = pd.to_numeric(features[name], errors="coerce").to_numpy(dtype=np.float64)
                blocks.append(((values - mean) / sd).reshape(n, 1))
            else:
                values = features[name].astype(str).to_numpy()
                # Unseen levels encode as all zeros
                kept = self.categorical[name]
                block = np.zeros((n, len(kept)))
                for j, level in enumerate(kept):
                    block[:, j] = values == level
                blocks.append(block)
        blocks.append(np.ones((n, 1)))

        values = np.hstack(blocks)
        if not np.isfinite(values).all():
            raise ValidationError("Encoded features contain non-finite values")
        return DesignMatrix(values=values, columns=self.columns, encoding=self)


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Row-major encoded features with a trailing intercept column"""

    values: np.ndarray
    columns: Tuple[ColumnSpec, ...]
    encoding: FeatureEncoding

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True, eq=False)
class LogisticModel:
    """Fitted coefficients and the convergence report"""

    coefficients: np.ndarray
    columns: Tuple[ColumnSpec, ...]
    encoding: FeatureEncoding
    converged: bool
    iterations: int
    gradient_norm: float
    loss_history: List[float]

    def coefficient_table(self):
        return {column.name: float(value) for column, value in zip(self.columns, self.coefficients)}

    def predict(self, features):
        """Score raw feature rows"""
        return predict_proba(self, self.encoding.apply(features))


def _is_numeric(series):
    return pd.api.types.is_numeric_dtype(series) and not pd.api.types.is_bool_dtype(series)


def encode(features, fit_rows=None):
    """Learn an encoding on fit_rows and apply it to every row"""
    features = pd.DataFrame(features).reset_index(drop=True)
    if len(features.columns) == 0:
        raise ValidationError("At least one feature is required")

    fit = features if fit_rows is None else features.iloc[np.asarray(fit_rows)]
    numeric, categorical = {}, {}
    for name in features.columns:
        if _is_numeric(features[name]):
            values = fit[name].astype(np.float64)
            sd = float(values.std(ddof=1)) if len(values) > 1 else 0.0
            # Constant columns keep unit scale
            numeric[name] = (float(values.mean()), sd if np.isfinite(sd) and sd > 0 else 1.0)
        else:
            levels = sorted(set(fit[name].astype(str)))
            categorical[name] = tuple(levels[1:])

    encoding = FeatureEncoding(order=tuple(features.columns), numeric=numeric, categorical=categorical)
    return encoding.apply(features)


def intercept_only(row_count):
    """Design matrix holding only the intercept column"""
    return FeatureEncoding().apply(pd.DataFrame(index=range(row_count)))


def _matrix(X):
    return X.values if isinstance(X, DesignMatrix) else np.asarray(X, dtype=np.float64)


def _penalty_mask(k):
    # Intercept is the last column and is never penalized
    mask = np.ones(k)
    mask[-1] = 0.0
    return mask


def logistic_loss_and_gradient(coef, X, y, weights=None, l2=0.0):
    """Weighted negative log-likelihood plus ridge term, and its gradient"""
    X = _matrix(X)
    coef = np.asarray(coef, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    weights = np.ones(len(y)) if weights is None else np.asarray(weights, dtype=np.float64)
    mask = _penalty_mask(len(coef))

    z = X @ coef
    loss = float(np.sum(weights * (np.logaddexp(0.0, z) - y * z)) + 0.5 * l2 * np.sum(mask * coef ** 2))
    gradient = X.T @ (weights * (expit(z) - y)) + l2 * mask * coef
    return loss, gradient


def fit_logistic(X, y, weights=None, l2=1e-6, max_iter=100, tol=1e-8):
    """Fit logistic regression by damped Newton steps with step halving"""
    matrix = _matrix(X)
    y = np.asarray(y, dtype=np.float64)
    n, k = matrix.shape

    # Validate inputs
    if len(y) != n:
        raise ValidationError(f"y has {len(y)} values, design matrix has {n} rows")
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValidationError("y must contain only 0 and 1")
    if not np.isfinite(matrix).all():
        raise ValidationError("Design matrix contains non-finite values")
    if weights is not None:
        weights = np.asarray(weights, dtype=np.float64)
        if len(weights) != n or not np.isfinite(weights).all() or (weights <= 0).any():
            raise ValidationError("Weights must be positive, finite and one per row")
    if l2 < 0:
        raise ParameterError(f"l2 must be non-negative, got {l2}")
    if max_iter < 1:
        raise ParameterError(f"max_iter must be positive, got {max_iter}")

    sample_weights = np.ones(n) if weights is None else weights
    mask = _penalty_mask(k)
    coef = np.zeros(k)
    loss, gradient = logistic_loss_and_gradient(coef, matrix, y, sample_weights, l2)
    history = [loss]
    converged = False
    iterations = 0

    while True:
        if np.max(np.abs(gradient)) < tol:
            converged = True
            break
        if iterations >= max_iter:
            break

        # Newton direction from the weighted Hessian
        p = expit(matrix @ coef)
        curvature = sample_weights * p * (1.0 - p)
        hessian = matrix.T @ (matrix * curvature[:, None]) + l2 * np.diag(mask)
        try:
            step = np.linalg.solve(hessian, gradient)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hessian, gradient, rcond=None)[0]

        # Halve the step until the loss stops increasing
        t = 1.0
        for _ in range(50):
            candidate = coef - t * step
            candidate_loss, candidate_gradient = logistic_loss_and_gradient(candidate, matrix, y, sample_weights, l2)
            if candidate_loss <= loss:
                break
            t *= 0.5
        else:
            break

        iterations += 1
        coef, loss, gradient = candidate, candidate_loss, candidate_gradient
        history.append(loss)

    gradient_norm = float(np.max(np.abs(gradient)))
    if not converged:
        logger.warning(f"Logistic fit stopped after {iterations} iterations, gradient norm {gradient_norm:.3g}")

    encoding = X.encoding if isinstance(X, DesignMatrix) else FeatureEncoding()
    columns = X.columns if isinstance(X, DesignMatrix) else tuple(ColumnSpec(f"x{j}") for j in range(k))
    return LogisticModel(
        coefficients=coef,
        columns=columns,
        encoding=encoding,
        converged=converged,
        iterations=iterations,
        gradient_norm=gradient_norm,
        loss_history=history,
    )


def predict_proba(model, X):
    """Logistic probabilities for encoded rows"""
    matrix = _matrix(X)
    if matrix.ndim != 2 or matrix.shape[1] != len(model.coefficients):
        raise ValidationError(
            f"Design matrix has {matrix.shape[-1]} columns, model expects {len(model.coefficients)}"
        )
    return expit(matrix @ model.coefficients)


def auc(scores, y_true):
    """Probability that a random positive outranks a random negative, ties counting one half"""
    scores = np.asarray(scores, dtype=np.float64)
    y_true = np.asarray(y_true)
    if len(scores) != len(y_true):
        raise ValidationError("scores and y_true differ in length")

    positives = int(np.sum(y_true == 1))
    negatives = int(np.sum(y_true == 0))
    if positives == 0 or negatives == 0:
        raise ValidationError("AUC needs both classes present")

    ranks = pd.Series(scores).rank(method="average").to_numpy()
    u = ranks[y_true == 1].sum() - positives * (positives + 1) / 2.0
    return float(u / (positives * negatives))
