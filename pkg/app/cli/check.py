#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Fairness Check Command
"""

import logging
import os

import click

from app.cli import AuditCommand, cli_bp, exit_status, handle_errors, load_inputs, run_config, shared_options
from app.fairness.audit import audit_from_dict, audit_to_dict, fairness_check, summarize_text
from app.plots.render import emit_plot_bundle
from app.plots.series import fairness_check_view, metric_scores_view
from app.utils.serialization import read_json, write_json, write_text

logger = logging.getLogger(__name__)

AUDIT_FILE = "audit.json"
SUMMARY_FILE = "summary.txt"


@cli_bp.cli.command("check", cls=AuditCommand)
@shared_options
@click.option("--merge", "merge_path", type=click.Path(dir_okay=False), help="Previous audit JSON to aggregate with")
@click.option("--render", is_flag=True, help="Also write SVG plots")
@handle_errors
def check_command(merge_path, render, **flags):
    """Audit every scored model against the five fairness checks"""
    config = run_config(**flags).require("privileged")
    d, spec, cutoffs = load_inputs(config)

    prior = audit_from_dict(read_json(merge_path)) if merge_path else None
    audit = fairness_check(d, spec, epsilon=config.epsilon, cutoffs=cutoffs, prior=prior)

    # Write audit report, summary and check plots
    summary = summarize_text(audit)
    write_json(os.path.join(config.out, AUDIT_FILE), audit_to_dict(audit, config_echo=config.echo()))
    write_text(os.path.join(config.out, SUMMARY_FILE), summary)
    emit_plot_bundle(
        [fairness_check_view(audit), metric_scores_view(audit.table(), spec)],
        config.out,
        render=render,
    )

    click.echo(summary, nl=False)
    click.get_current_context().exit(exit_status(audit))
