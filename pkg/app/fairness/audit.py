#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Fairness Check Module

Five-criterion epsilon-ratio check per model, total loss, aggregation of
several audits into one and the plain-text summary.
"""

import enum
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

from app.data.dataset import CutoffMap, ProtectedSpec, default_cutoffs, partition_subgroups
from app.fairness.metrics import (
    ALL_METRICS,
    CHECK_CRITERIA,
    CHECK_METRICS,
    Confusion,
    GroupMetricTable,
    LossSum,
    MetricId,
    classify,
    metric_ratios,
    model_metric_values,
    parity_losses,
    pooled_performance,
    summed_parity_loss,
)
from app.utils.errors import ParameterError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.8
REPORT_VERSION = "1.0"


class Verdict(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


def judge_ratio(ratio, epsilon):
    """Pass iff epsilon < ratio < 1/epsilon; undefined ratios are inconclusive"""
    if ratio is None:
        return Verdict.INCONCLUSIVE
    return Verdict.PASS if epsilon < ratio < 1.0 / epsilon else Verdict.FAIL


def validate_epsilon(epsilon):
    epsilon = float(epsilon)
    if not 0.0 < epsilon <= 1.0:
        raise ParameterError(f"epsilon must lie in (0, 1], got {epsilon}")
    return epsilon


@dataclass(frozen=True)
class CheckResult:
    """Ratios and verdicts of one check metric across unprivileged levels"""

    metric: MetricId
    ratios: Dict[str, Optional[float]]
    verdicts: Dict[str, Verdict]

    @property
    def criterion(self):
        return CHECK_CRITERIA[self.metric]

    @property
    def verdict(self):
        verdicts = set(self.verdicts.values())
        if Verdict.FAIL in verdicts:
            return Verdict.FAIL
        if Verdict.INCONCLUSIVE in verdicts:
            return Verdict.INCONCLUSIVE
        return Verdict.PASS


@dataclass(frozen=True)
class ModelAudit:
    """Audit record of one model"""

    label: str
    cutoffs: CutoffMap
    checks: Dict[MetricId, CheckResult]
    parity_loss: Dict[MetricId, Optional[float]]
    metric_scores: Dict[str, Dict[MetricId, Optional[float]]]
    confusion: Dict[str, Confusion]
    performance: Dict[str, Optional[float]] = field(default_factory=dict)

    def _count(self, verdict):
        return sum(1 for check in self.checks.values() if check.verdict == verdict)

    @property
    def passed_count(self):
        return self._count(Verdict.PASS)

    @property
    def failed_count(self):
        return self._count(Verdict.FAIL)

    @property
    def inconclusive_count(self):
        return self._count(Verdict.INCONCLUSIVE)

    @property
    def passes(self):
        return self.failed_count == 0 and self.inconclusive_count == 0

    @property
    def loss(self):
        return summed_parity_loss(self.parity_loss, CHECK_METRICS)

    @property
    def total_loss(self):
        return self.loss.total

    @property
    def skipped(self):
        return self.loss.skipped


@dataclass(frozen=True)
class FairnessAudit:
    """Aggregated audit of one or more models on the same rows"""

    epsilon: float
    spec: ProtectedSpec
    cutoffs: CutoffMap
    row_count: int
    models: Dict[str, ModelAudit]
    warnings: Tuple[str, ...] = ()

    @property
    def labels(self):
        return list(self.models)

    def model(self, label):
        if label not in self.models:
            raise ValidationError(f"Unknown model '{label}', available: {', '.join(self.models)}")
        return self.models[label]

    def table(self):
        """Group metric table of every audited model"""
        return GroupMetricTable(
            values={label: m.metric_scores for label, m in self.models.items()},
            confusion={label: m.confusion for label, m in self.models.items()},
        )


def _checks(level_values, spec, epsilon):
    checks = {}
    for metric in CHECK_METRICS:
        ratios = metric_ratios(level_values, spec, metric)
        checks[metric] = CheckResult(
            metric=metric,
            ratios=ratios,
            verdicts={level: judge_ratio(ratio, epsilon) for level, ratio in ratios.items()},
        )
    return checks


def _audit_model(d, label, spec, epsilon, cutoffs, partition):
    level_values, confusion = model_metric_values(d, label, cutoffs, partition)
    y_pred = classify(d.scores[label], d.protected, cutoffs)
    return ModelAudit(
        label=label,
        cutoffs=cutoffs,
        checks=_checks(level_values, spec, epsilon),
        parity_loss=parity_losses(level_values, spec, ALL_METRICS),
        metric_scores=level_values,
        confusion=confusion,
        performance=pooled_performance(d.y_true, y_pred, d.scores[label]),
    )


def _rejudge(model, epsilon):
    checks = {
        metric: replace(check, verdicts={level: judge_ratio(r, epsilon) for level, r in check.ratios.items()})
        for metric, check in model.checks.items()
    }
    return replace(model, checks=checks)


def _warnings(models):
    notes = []
    for model in models.values():
        if model.cutoffs.differs:
            notes.append(
                f"{model.label}: subgroups use different cutoffs "
                f"({', '.join(f'{k}={v}' for k, v in model.cutoffs.items())}); "
                "this may conflict with individual fairness"
            )
        undefined = [m.value for m in CHECK_METRICS if model.parity_loss[m] is None]
        if undefined:
            notes.append(f"{model.label}: undefined parity loss skipped in total loss: {', '.join(undefined)}")
    return tuple(notes)


def fairness_check(d, spec, epsilon=DEFAULT_EPSILON, cutoffs=None, prior=None):
    """Audit every model of d, merged with the models of a prior audit"""
    epsilon = validate_epsilon(epsilon)
    if not d.scores:
        raise ValidationError("fairness_check needs at least one model score column")
    if set(spec.levels) != set(d.levels):
        raise ValidationError(
            f"Protected levels {', '.join(spec.levels)} do not match dataset levels {', '.join(d.levels)}"
        )

    cutoffs = cutoffs if cutoffs is not None else default_cutoffs(d)
    missing = [level for level in d.levels if level not in cutoffs]
    if missing:
        raise ValidationError(f"No cutoff for levels: {', '.join(missing)}")

    # Merged audits must describe the same rows and subgroups
    if prior is not None:
        if prior.spec != spec:
            raise ValidationError(
                f"Prior audit uses privileged '{prior.spec.privileged}' with levels "
                f"{', '.join(prior.spec.levels)}; protected and privileged must match"
            )
        if prior.row_count != d.row_count:
            raise ValidationError(f"Prior audit covers {prior.row_count} rows, dataset has {d.row_count}")
        duplicates = sorted(set(prior.models) & set(d.scores))
        if duplicates:
            raise ValidationError(f"Models must have different labels, duplicated: {', '.join(duplicates)}")

    partition = partition_subgroups(d)
    models = {label: _audit_model(d, label, spec, epsilon, cutoffs, partition) for label in d.model_labels}
    if prior is not None:
        models.update({label: _rejudge(model, epsilon) for label, model in prior.models.items()})

    for model in models.values():
        logger.info(f"{model.label}: passed {model.passed_count}/{len(CHECK_METRICS)} checks")

    return FairnessAudit(
        epsilon=epsilon,
        spec=spec,
        cutoffs=cutoffs,
        row_count=d.row_count,
        models=models,
        warnings=_warnings(models),
    )


def total_loss(a, model):
    """Sum of defined check-metric parity losses and the number skipped"""
    record = a.model(model)
    return LossSum(total=record.total_loss, skipped=record.skipped)


def summarize_text(a):
    """Line-oriented plain-text summary of an audit"""
    lines = [
        f"Fairness check for models: {', '.join(a.models)}",
        f"epsilon: {a.epsilon:g}, privileged: {a.spec.privileged}, unprivileged: {', '.join(a.spec.unprivileged)}",
        "",
    ]
    total = len(CHECK_METRICS)
    for model in a.models.values():
        lines.append(
            f"{model.label} passes {model.passed_count}/{total} metrics "
            f"(failed: {model.failed_count}, inconclusive: {model.inconclusive_count})"
        )
        for verdict in (Verdict.FAIL, Verdict.INCONCLUSIVE):
            names = [f"{c.criterion} ({c.metric.value})" for c in model.checks.values() if c.verdict == verdict]
            if names:
                lines.append(f"  {verdict.value}: {', '.join(names)}")
        lines.append(f"  total loss: {model.total_loss:.6f} (undefined metrics skipped: {model.skipped})")
        if model.passes:
            lines.append(f"  {model.label} passes fairness check")
        else:
            lines.append(f"  {model.label} does not pass fairness check")
        lines.append("")

    for note in a.warnings:
        lines.append(f"warning: {note}")
    return "\n".join(lines).rstrip("\n") + "\n"


def _metric_map(values):
    return {metric.value: value for metric, value in values.items()}


def audit_to_dict(a, config_echo=None):
    """Report JSON document of an audit"""
    models = []
    for model in a.models.values():
        models.append({
            "label": model.label,
            "cutoffs": dict(model.cutoffs),
            "checks": {
                metric.value: {
                    "criterion": check.criterion,
                    "ratios": check.ratios,
                    "verdicts": {level: v.value for level, v in check.verdicts.items()},
                    "verdict": check.verdict.value,
                }
                for metric, check in model.checks.items()
            },
            "parity_loss": _metric_map(model.parity_loss),
            "total_loss": model.total_loss,
            "skipped": model.skipped,
            "passed": model.passed_count,
            "failed": model.failed_count,
            "inconclusive": model.inconclusive_count,
            "metric_scores": {level: _metric_map(values) for level, values in model.metric_scores.items()},
            "confusion": {
                level: {"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn} for level, c in model.confusion.items()
            },
            "performance": model.performance,
        })

    return {
        "version": REPORT_VERSION,
        "config_echo": config_echo or {},
        "epsilon": a.epsilon,
        "protected": {"privileged": a.spec.privileged, "unprivileged": list(a.spec.unprivileged)},
        "row_count": a.row_count,
        "cutoffs": dict(a.cutoffs),
        "models": models,
        "warnings": list(a.warnings),
    }


def audit_from_dict(payload):
    """Rebuild an audit from its report JSON document"""
    try:
        epsilon = validate_epsilon(payload["epsilon"])
        spec = ProtectedSpec(
            privileged=payload["protected"]["privileged"],
            unprivileged=tuple(payload["protected"]["unprivileged"]),
        )
        models = {}
        for record in payload["models"]:
            checks = {}
            for key, check in record["checks"].items():
                metric = MetricId(key)
                checks[metric] = CheckResult(
                    metric=metric,
                    ratios=dict(check["ratios"]),
                    verdicts={level: judge_ratio(r, epsilon) for level, r in check["ratios"].items()},
                )
            models[record["label"]] = ModelAudit(
                label=record["label"],
                cutoffs=CutoffMap(record["cutoffs"]),
                checks=checks,
                parity_loss={MetricId(k): v for k, v in record["parity_loss"].items()},
                metric_scores={
                    level: {MetricId(k): v for k, v in values.items()}
                    for level, values in record["metric_scores"].items()
                },
                confusion={level: Confusion(**counts) for level, counts in record["confusion"].items()},
                performance=dict(record.get("performance", {})),
            )
        return FairnessAudit(
            epsilon=epsilon,
            spec=spec,
            cutoffs=CutoffMap(payload["cutoffs"]),
            row_count=int(payload["row_count"]),
            models=models,
            warnings=_warnings(models),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"Not a fairness audit report: {e}")
