#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Bias Mitigation Command
"""

import logging
import os

import click

from app.cli import AuditCommand, cli_bp, handle_errors, load_inputs, run_config, shared_options
from app.data.dataset import dump_dataset
from app.fairness.metrics import CHECK_METRICS, MetricId
from app.mitigation.postprocessing import PivotParams, cutoff_search, default_grid, roc_pivot
from app.mitigation.preprocessing import PreprocessMethod, pre_process_data
from app.plots.render import emit_plot_bundle
from app.plots.series import cutoff_sweep
from app.utils.errors import UsageError
from app.utils.serialization import write_json, write_text

logger = logging.getLogger(__name__)

MITIGATED_FILE = "mitigated.csv"
SEARCH_FILE = "cutoff_search.json"

PRE_METHODS = {
    "reweight": PreprocessMethod.REWEIGHT,
    "resample-uniform": PreprocessMethod.RESAMPLE_UNIFORM,
    "resample-preferential": PreprocessMethod.RESAMPLE_PREFERENTIAL,
    "dir": PreprocessMethod.DISPARATE_IMPACT_REMOVER,
}
METHODS = tuple(PRE_METHODS) + ("roc-pivot", "cutoff-search")


def _pre_process(config, output):
    needs_scores = config.method == "resample-preferential"
    if needs_scores:
        config.require("ranker")
    if config.method == "dir":
        config.require("feature", "lam")

    d, spec, _ = load_inputs(config, require_scores=needs_scores)
    params = {"seed": config.seed, "spec": spec}
    if needs_scores:
        params.update(ranker=config.ranker, cutoff=config.pivot_cutoff)
    if config.method == "dir":
        params.update(feature=config.feature, lam=config.lam)

    mitigated = pre_process_data(d, PRE_METHODS[config.method], **params)
    write_text(output, dump_dataset(mitigated))
    click.echo(f"{config.method}: wrote {mitigated.row_count} rows to {output}")


def _roc_pivot(config, output):
    config.require("privileged", "theta", "model")
    d, spec, _ = load_inputs(config)
    if config.model not in d.scores:
        raise UsageError(f"--model '{config.model}' is not a --score label, available: {', '.join(d.model_labels)}")

    adjusted = roc_pivot(d.scores[config.model], d.protected, spec, PivotParams(config.theta, config.pivot_cutoff))
    write_text(output, dump_dataset(d.with_scores(config.model, adjusted)))
    changed = int((adjusted != d.scores[config.model]).sum())
    click.echo(f"roc-pivot: changed {changed} scores of '{config.model}', wrote {output}")


def _cutoff_search(config):
    config.require("privileged", "model", "subgroup")
    d, spec, cutoffs = load_inputs(config)
    metrics = MetricId.parse(config.metrics) if config.metrics else CHECK_METRICS
    grid = default_grid(config.grid_step)

    result = cutoff_search(d, spec, config.model, config.subgroup, metrics, grid=grid, cutoffs=cutoffs)
    write_json(os.path.join(config.out, SEARCH_FILE), {
        "config_echo": config.echo(),
        "model": result.model,
        "subgroup": result.subgroup,
        "metrics": [m.value for m in result.metrics],
        "best_cutoff": result.best_cutoff,
        "best_loss": result.best_loss,
        "best_skipped": result.best_skipped,
        "points": [
            {"cutoff": p.cutoff, "total": p.total, "skipped": p.skipped,
             "losses": {m.value: v for m, v in p.losses.items()}}
            for p in result.points
        ],
    })
    emit_plot_bundle(
        [cutoff_sweep(d, spec, config.model, metrics, subgroup=config.subgroup, grid=grid,
                      cumulated=True, cutoffs=cutoffs)],
        config.out,
    )
    click.echo(
        f"cutoff-search: best cutoff for '{result.subgroup}' is {result.best_cutoff:g} "
        f"(summed parity loss {result.best_loss:.6f}, undefined skipped: {result.best_skipped})"
    )


@cli_bp.cli.command("mitigate", cls=AuditCommand)
@shared_options
@click.option("--method", type=click.Choice(METHODS), help="Mitigation method")
@click.option("--lambda", "lam", type=float, help="Repair degree of the disparate impact remover")
@click.option("--feature", help="Numeric feature to repair")
@click.option("--theta", type=float, help="Radius of the critical region around the cutoff")
@click.option("--pivot-cutoff", type=float, help="Cutoff of the ranker and the pivot, default 0.5")
@click.option("--model", help="Model label whose scores are pivoted or searched")
@click.option("--ranker", help="Model label ranking borderline rows for preferential resampling")
@click.option("--subgroup", help="Subgroup whose cutoff is searched")
@click.option("--metrics", help="Comma-separated metrics for the cutoff search")
@click.option("--grid-step", type=float, help="Spacing of the cutoff grid")
@click.option("--output", type=click.Path(dir_okay=False), help="Output data file")
@handle_errors
def mitigate_command(output, **flags):
    """Transform data or scores to reduce bias"""
    config = run_config(**flags).require("method")
    output = output or os.path.join(config.out, MITIGATED_FILE)

    if config.method in PRE_METHODS:
        _pre_process(config, output)
    elif config.method == "roc-pivot":
        _roc_pivot(config, output)
    else:
        _cutoff_search(config)
