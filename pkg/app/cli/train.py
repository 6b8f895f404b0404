#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Logistic Model Training Command
"""

import logging
import os

import click
import pandas as pd

from app.ai.logistic import encode, fit_logistic, intercept_only as intercept_design, predict_proba
from app.cli import AuditCommand, cli_bp, handle_errors, load_inputs, run_config, shared_options
from app.data.dataset import SCORE_PREFIX, dump_dataset
from app.mitigation.preprocessing import WEIGHTS_COLUMN
from app.utils.errors import UsageError, ValidationError
from app.utils.serialization import write_json, write_text

logger = logging.getLogger(__name__)

SCORED_FILE = "scored.csv"
DEFAULT_MODEL_LABEL = "logistic"


def _feature_names(d, features, all_features, weights):
    if not all_features:
        return list(features)
    # Score and weight columns never feed the model
    names = [
        name for name in d.features.columns
        if not name.startswith(SCORE_PREFIX) and name not in (WEIGHTS_COLUMN, weights)
    ]
    return names + [d.schema.protected]


def _frame(d, names):
    return pd.DataFrame({name: d.column(name).to_numpy() for name in names})


def _weights(d, column):
    if column is None:
        return None
    values = pd.to_numeric(d.column(column), errors="coerce").to_numpy(dtype=float)
    if pd.isna(values).any():
        raise ValidationError(f"Weights column '{column}' must be numeric")
    return values


@cli_bp.cli.command("train", cls=AuditCommand)
@shared_options
@click.option("--feature", "features", multiple=True, help="Feature column to train on (repeatable)")
@click.option("--all-features", is_flag=True, help="Train on every feature column and the protected attribute")
@click.option("--intercept-only", is_flag=True, help="Train a constant model")
@click.option("--weights", help="Column of per-row training weights")
@click.option("--model-label", default=DEFAULT_MODEL_LABEL, show_default=True, help="Label of the new score column")
@click.option("--fit-input", type=click.Path(dir_okay=False), help="Fit on this file and score --input")
@click.option("--l2", type=float, default=1e-6, show_default=True, help="Ridge penalty on non-intercept coefficients")
@click.option("--max-iter", type=int, default=100, show_default=True, help="Newton iteration limit")
@click.option("--output", type=click.Path(dir_okay=False), help="Output data file")
@handle_errors
def train_command(features, all_features, intercept_only, weights, model_label, fit_input, l2, max_iter, output, **flags):
    """Fit a logistic model and append its scores as a new model column"""
    chosen = sum([bool(features), all_features, intercept_only])
    if chosen != 1:
        raise UsageError("Give exactly one of --feature, --all-features or --intercept-only")

    config = run_config(**flags)
    d, _, _ = load_inputs(config, require_scores=False)
    fit_d = d
    if fit_input:
        fit_d, _, _ = load_inputs(run_config(**{**flags, "input": fit_input}), require_scores=False)

    # Validate model label
    column = f"{SCORE_PREFIX}{model_label}"
    if model_label in d.scores or column in d.features.columns:
        raise ValidationError(f"Model label '{model_label}' collides with existing column '{column}'")

    sample_weights = _weights(fit_d, weights)
    if intercept_only:
        model = fit_logistic(intercept_design(fit_d.row_count), fit_d.y_true, sample_weights, l2=l2, max_iter=max_iter)
        scores = predict_proba(model, intercept_design(d.row_count))
    else:
        names = _feature_names(fit_d, features, all_features, weights)
        model = fit_logistic(encode(_frame(fit_d, names)), fit_d.y_true, sample_weights, l2=l2, max_iter=max_iter)
        scores = model.predict(_frame(d, names))

    output = output or os.path.join(config.out, SCORED_FILE)
    write_text(output, dump_dataset(d.with_scores(model_label, scores, column)))
    write_json(os.path.join(config.out, f"model_{model_label}.json"), {
        "config_echo": config.echo(),
        "model_label": model_label,
        "fit_rows": fit_d.row_count,
        "converged": model.converged,
        "iterations": model.iterations,
        "gradient_norm": model.gradient_norm,
        "loss": model.loss_history[-1],
        "coefficients": model.coefficient_table(),
    })

    status = "converged" if model.converged else "did not converge"
    click.echo(f"{model_label}: {status} after {model.iterations} iterations, wrote {column} to {output}")