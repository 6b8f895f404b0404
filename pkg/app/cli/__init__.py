#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Command Line Module Initialization
"""

import logging
from functools import wraps

import click
from flask import Blueprint, current_app

from app.data.dataset import DatasetSchema, load_dataset, make_cutoffs, validate_protected_spec
from app.utils.config import build_run_config
from app.utils.errors import EXIT_ERROR, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE, FairAuditError

logger = logging.getLogger(__name__)

# Commands are registered directly on the application's command group
cli_bp = Blueprint("cli", __name__, cli_group=None)


class UsageExitMixin:
    """Report click parse errors with the usage exit code"""

    def make_context(self, *args, **kwargs):
        try:
            return super().make_context(*args, **kwargs)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise

    def resolve_command(self, ctx, args):
        try:
            return super().resolve_command(ctx, args)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise


class AuditCommand(UsageExitMixin, click.Command):
    pass


def handle_errors(f):
    """Turn auditing errors into a message, a hint and the error's exit code"""
    @wraps(f)
    def decorated(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return f(*args, **kwargs)
        except FairAuditError as e:
            logger.debug(f"{type(e).__name__}: {e}")
            click.echo(f"error: {e}", err=True)
            if e.hint:
                click.echo(f"hint: {e.hint}", err=True)
            ctx.exit(e.exit_code)
        except (click.exceptions.Exit, click.exceptions.Abort, click.ClickException):
            raise
        except Exception as e:
            # Exit codes 1 and 2 belong to audit verdicts
            logger.exception(f"Unexpected {type(e).__name__}")
            click.echo(f"error: unexpected {type(e).__name__}: {e}", err=True)
            ctx.exit(EXIT_ERROR)

    return decorated


def shared_options(f):
    """Flags every command accepts"""
    options = [
        click.option("--input", "input", type=click.Path(dir_okay=False), help="Delimited input file with a header row"),
        click.option("--label-col", help="Column holding the true label"),
        click.option("--protected-col", help="Column holding the protected attribute"),
        click.option("--score", "scores", multiple=True, help="Model score column as label=column (repeatable)"),
        click.option("--favorable", help="Raw label value mapped to 1"),
        click.option("--unfavorable", help="Raw label value mapped to 0"),
        click.option("--privileged", help="Privileged protected level"),
        click.option("--epsilon", type=float, help="Acceptable ratio bound, default 0.8"),
        click.option("--cutoff", multiple=True, help="Per-subgroup cutoff as level=value (repeatable)"),
        click.option("--out", help="Output directory"),
        click.option("--seed", type=int, help="Seed for every random draw"),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def run_config(**flags):
    """Validated run configuration over the application defaults"""
    return build_run_config(current_app.config, **flags)


def load_inputs(config, require_scores=True):
    """Load the dataset, resolve the privileged level and build cutoffs"""
    config.require("input", "label_col", "protected_col")
    if require_scores:
        config.require("scores")

    schema = DatasetSchema.from_flags(
        config.label_col,
        config.protected_col,
        scores=config.scores,
        favorable=config.favorable,
        unfavorable=config.unfavorable,
    )
    d = load_dataset(config.input, schema, require_scores=require_scores)
    spec = validate_protected_spec(d, config.privileged) if config.privileged is not None else None
    cutoffs = make_cutoffs(d, config.cutoffs)
    return d, spec, cutoffs


def exit_status(a):
    """0 when every model passes, 1 on any failure, 2 when only inconclusive"""
    if any(model.failed_count for model in a.models.values()):
        return EXIT_FAIL
    if any(model.inconclusive_count for model in a.models.values()):
        return EXIT_INCONCLUSIVE
    return 0


from app.cli import check, mitigate, report, train  # noqa: E402,F401
