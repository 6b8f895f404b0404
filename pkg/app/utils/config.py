#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Run Configuration Module

Builds one validated RunConfig from command flags layered over the
application config (environment defaults).
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional, Tuple

from app.fairness.metrics import MetricId
from app.utils.errors import UsageError, ValidationError

logger = logging.getLogger(__name__)

# Flag name of every field that commands may require
FLAG_NAMES = {
    "input": "--input",
    "label_col": "--label-col",
    "protected_col": "--protected-col",
    "privileged": "--privileged",
    "scores": "--score",
    "method": "--method",
    "lam": "--lambda",
    "theta": "--theta",
    "feature": "--feature",
    "model": "--model",
    "ranker": "--ranker",
    "subgroup": "--subgroup",
}


def parse_pairs(values, flag):
    """Parse repeated 'name=number' flags into a dict"""
    pairs = {}
    for value in values or ():
        name, sep, number = str(value).partition("=")
        name = name.strip()
        if not sep or not name:
            raise UsageError(f"Invalid {flag} '{value}', expected name=value")
        try:
            pairs[name] = float(number)
        except ValueError:
            raise UsageError(f"Invalid {flag} '{value}', '{number}' is not a number")
    return pairs


def parse_list(value):
    """Split a comma-separated flag value"""
    if value is None:
        return None
    return tuple(item.strip() for item in str(value).split(",") if item.strip())


def _in_range(value, low, high, closed_low, closed_high):
    if value is None or not math.isfinite(value):
        return False
    above = value >= low if closed_low else value > low
    below = value <= high if closed_high else value < high
    return above and below


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters of one command run"""

    input: Optional[str] = None
    label_col: Optional[str] = None
    protected_col: Optional[str] = None
    scores: Tuple[str, ...] = ()
    favorable: Optional[str] = None
    unfavorable: Optional[str] = None
    privileged: Optional[str] = None
    epsilon: float = 0.8
    cutoffs: Dict[str, float] = field(default_factory=dict)
    out: str = "fairness_reports"
    seed: int = 42
    method: Optional[str] = None
    lam: Optional[float] = None
    theta: Optional[float] = None
    pivot_cutoff: float = 0.5
    feature: Optional[str] = None
    model: Optional[str] = None
    ranker: Optional[str] = None
    subgroup: Optional[str] = None
    metrics: Optional[Tuple[str, ...]] = None
    performance: str = "accuracy"
    grid_step: float = 0.01
    bins: int = 20

    def __post_init__(self):
        self.validate()

    def validate(self):
        """Check every numeric parameter range"""
        if not _in_range(self.epsilon, 0.0, 1.0, False, True):
            raise UsageError(f"--epsilon must lie in (0, 1], got {self.epsilon}")
        for level, value in self.cutoffs.items():
            if not _in_range(value, 0.0, 1.0, False, False):
                raise UsageError(f"--cutoff {level}={value} must lie in (0, 1)")
        if self.lam is not None and not _in_range(self.lam, 0.0, 1.0, True, True):
            raise UsageError(f"--lambda must lie in [0, 1], got {self.lam}")
        if self.theta is not None and not _in_range(self.theta, 0.0, 1.0, False, False):
            raise UsageError(f"--theta must lie in (0, 1), got {self.theta}")
        if not _in_range(self.pivot_cutoff, 0.0, 1.0, False, False):
            raise UsageError(f"--pivot-cutoff must lie in (0, 1), got {self.pivot_cutoff}")
        if not _in_range(self.grid_step, 0.0, 0.5, False, True):
            raise UsageError(f"--grid-step must lie in (0, 0.5], got {self.grid_step}")
        if int(self.bins) < 2:
            raise UsageError(f"--bins must be at least 2, got {self.bins}")
        if self.metrics is not None:
            if not self.metrics:
                raise UsageError("--metrics needs at least one metric name")
            try:
                MetricId.parse(self.metrics)
            except ValidationError as e:
                raise UsageError(str(e))

    def require(self, *names):
        """Raise a usage error naming every missing required flag"""
        missing = [FLAG_NAMES.get(name, name) for name in names if getattr(self, name) in (None, ())]
        if missing:
            raise UsageError(f"Missing required option(s): {', '.join(missing)}")
        return self

    def echo(self):
        """Parameters recorded in every report; the output location is not one of them"""
        return {key: value for key, value in asdict(self).items() if value is not None and key != "out"}


def build_run_config(app_config, **flags):
    """Layer command flags over the application defaults"""
    defaults = {
        "epsilon": app_config.get("FAIRNESS_EPSILON", 0.8),
        "seed": app_config.get("FAIRNESS_SEED", 42),
        "out": app_config.get("FAIRNESS_OUTPUT_DIR", "fairness_reports"),
        "bins": app_config.get("FAIRNESS_BINS", 20),
        "grid_step": app_config.get("FAIRNESS_GRID_STEP", 0.01),
    }
    values = {key: value for key, value in flags.items() if value is not None}
    for key, value in defaults.items():
        values.setdefault(key, value)

    # Numeric values from the environment arrive as strings
    try:
        values["epsilon"] = float(values["epsilon"])
        values["seed"] = int(values["seed"])
        values["bins"] = int(values["bins"])
        values["grid_step"] = float(values["grid_step"])
    except (TypeError, ValueError) as e:
        raise UsageError(f"Invalid numeric configuration value: {e}")

    values["cutoffs"] = parse_pairs(values.pop("cutoff", ()), "--cutoff")
    values["scores"] = tuple(values.get("scores", ()))
    values["metrics"] = parse_list(values.get("metrics"))

    config = RunConfig(**values)
    logger.debug(f"Run configuration: {config.echo()}")
    return config
