#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Plot Report Command
"""

import logging

import click

from app.cli import AuditCommand, cli_bp, handle_errors, load_inputs, run_config, shared_options
from app.fairness.audit import fairness_check
from app.fairness.metrics import ALL_METRICS, CHECK_METRICS, MetricId
from app.mitigation.postprocessing import default_grid
from app.plots.render import emit_plot_bundle
from app.plots.series import (
    PERFORMANCE_MEASURES,
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
from app.utils.config import parse_list
from app.utils.errors import UsageError, ValidationError

logger = logging.getLogger(__name__)


def build_series(kinds, d, spec, cutoffs, audit, config, model, subgroup, normalize, explicit):
    """Compute the series of every requested kind"""
    selected = MetricId.parse(config.metrics) if config.metrics else None
    matrix = parity_loss_matrix(audit, selected or ALL_METRICS)
    check_metrics = selected or CHECK_METRICS
    focus = selected[0] if selected else MetricId.FPR
    grid = default_grid(config.grid_step)

    builders = {
        PlotKind.FAIRNESS_CHECK_BARS: lambda: fairness_check_view(audit),
        PlotKind.METRIC_SCORES: lambda: metric_scores_view(audit.table(), spec, check_metrics),
        PlotKind.RADAR: lambda: radar_view(matrix),
        PlotKind.HEATMAP: lambda: heatmap_view(matrix, normalize=normalize),
        PlotKind.PCA: lambda: pca_projection(matrix),
        PlotKind.CHOOSE_METRIC: lambda: choose_metric_view(matrix, focus),
        PlotKind.STACK_METRICS: lambda: stack_metrics_view(matrix),
        PlotKind.GROUP_METRIC: lambda: group_metric_view(audit, focus, config.performance),
        PlotKind.DENSITY: lambda: score_density(d, spec, model, bins=config.bins),
        PlotKind.PERFORMANCE_AND_FAIRNESS: lambda: performance_vs_fairness(audit, config.performance, check_metrics),
        PlotKind.ALL_CUTOFFS: lambda: cutoff_sweep(d, spec, model, check_metrics, grid=grid),
        PlotKind.CETERIS_PARIBUS_CUTOFF: lambda: cutoff_sweep(
            d, spec, model, check_metrics, subgroup=subgroup, grid=grid, cumulated=True, cutoffs=cutoffs
        ),
    }

    series = []
    for kind in kinds:
        try:
            series.append(builders[kind]())
        except ValidationError as e:
            # Only the projection may be skipped, and only when it was not asked for
            if kind is not PlotKind.PCA or explicit:
                raise
            logger.warning(f"Skipping {kind.value}: {e}")
    return series


@cli_bp.cli.command("report", cls=AuditCommand)
@shared_options
@click.option("--plots", help="Comma-separated plot kinds, default all applicable")
@click.option("--model", help="Model for density and cutoff plots, default the first")
@click.option("--subgroup", help="Subgroup for the ceteris paribus cutoff plot, default the first unprivileged")
@click.option("--metrics", help="Comma-separated metrics")
@click.option("--performance", type=click.Choice(PERFORMANCE_MEASURES), help="Performance measure, default accuracy")
@click.option("--bins", type=int, help="Density histogram bins")
@click.option("--normalize", is_flag=True, help="Z-score heatmap columns")
@click.option("--grid-step", type=float, help="Spacing of the cutoff grid")
@click.option("--render", is_flag=True, help="Also write SVG plots")
@handle_errors
def report_command(plots, normalize, render, **flags):
    """Emit the plot data bundle for every scored model"""
    requested = parse_list(plots)
    if requested is not None and not requested:
        raise UsageError("--plots needs at least one kind")
    try:
        kinds = PlotKind.parse(requested) if requested else tuple(PlotKind)
    except ValidationError as e:
        raise UsageError(str(e))

    config = run_config(**flags).require("privileged")
    d, spec, cutoffs = load_inputs(config)
    audit = fairness_check(d, spec, epsilon=config.epsilon, cutoffs=cutoffs)

    model = config.model or d.model_labels[0]
    subgroup = config.subgroup or spec.unprivileged[0]
    series = build_series(kinds, d, spec, cutoffs, audit, config, model, subgroup, normalize, explicit=bool(requested))

    manifest = emit_plot_bundle(series, config.out, render=render)
    click.echo(f"Wrote {len(manifest['series'])} plot series to {config.out}")
