#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Plot Bundle Module

Writes plot series as JSON documents and, optionally, minimal static SVG
renderings with matplotlib.
"""

import logging
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from app.plots.series import PlotKind  # noqa: E402
from app.utils.errors import FairAuditError  # noqa: E402
from app.utils.serialization import write_json  # noqa: E402

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
SVG_HASH_SALT = "fairness-audit"

BAND_COLOR = "#c8ecc8"
BAR_COLOR = "#4378bf"


def _label(p, *keys):
    return " / ".join(str(p.labels[k]) for k in keys if p.labels.get(k) is not None)


def _draw_fairness_check(ax, series):
    points = [p for p in series.points if not p.missing]
    low, high = series.annotations["band"]
    # Bars grow from 1, so the band is shifted the same way
    ax.axvspan(low - 1.0, high - 1.0, color=BAND_COLOR, zorder=0)
    ax.barh(range(len(points)), [p.values[1] for p in points], color=BAR_COLOR)
    ax.set_yticks(range(len(points)))
    ax.set_yticklabels([_label(p, "model", "metric", "subgroup") for p in points], fontsize=7)
    ax.axvline(0.0, color="black", linewidth=0.8)
    ax.set_xlabel("ratio - 1")


def _draw_bars(ax, series, *keys):
    points = [p for p in series.points if not p.missing]
    ax.barh(range(len(points)), [p.values[0] for p in points], color=BAR_COLOR)
    ax.set_yticks(range(len(points)))
    ax.set_yticklabels([_label(p, *keys) for p in points], fontsize=7)
    ax.set_xlabel(series.axes[0].name)


def _draw_stack(ax, series):
    points = [p for p in series.points if not p.missing]
    models = list(dict.fromkeys(p.labels["model"] for p in points))
    for p in points:
        row = models.index(p.labels["model"])
        ax.barh(row, p.values[0], left=p.values[1], edgecolor="white")
        ax.text(p.values[1] + p.values[0] / 2.0, row, p.labels["metric"], ha="center", va="center", fontsize=6)
    ax.set_yticks(range(len(models)))
    ax.set_yticklabels(models, fontsize=7)
    ax.set_xlabel("parity_loss")


def _draw_heatmap(ax, series):
    models = list(dict.fromkeys(p.labels["model"] for p in series.points))
    metrics = list(dict.fromkeys(p.labels["metric"] for p in series.points))
    grid = [[float("nan")] * len(metrics) for _ in models]
    for p in series.points:
        if not p.missing:
            grid[models.index(p.labels["model"])][metrics.index(p.labels["metric"])] = p.values[0]
    image = ax.imshow(grid, aspect="auto", cmap="viridis")
    ax.set_xticks(range(len(metrics)))
    ax.set_xticklabels(metrics, rotation=90, fontsize=7)
    ax.set_yticks(range(len(models)))
    ax.set_yticklabels(models, fontsize=7)
    ax.figure.colorbar(image, ax=ax)


def _draw_scatter(ax, series, key):
    for p in series.points:
        if p.missing:
            continue
        ax.scatter(p.values[0], p.values[1], color=BAR_COLOR)
        ax.annotate(str(p.labels.get(key)), (p.values[0], p.values[1]), fontsize=7)
    ax.set_xlabel(series.axes[0].name)
    ax.set_ylabel(series.axes[1].name)


def _draw_density(ax, series):
    subgroups = list(dict.fromkeys(p.labels["subgroup"] for p in series.points))
    for level in subgroups:
        points = [p for p in series.points if p.labels["subgroup"] == level]
        edges = [p.values[0] for p in points] + [points[-1].values[1]]
        ax.stairs([p.values[2] for p in points], edges, label=level)
    ax.set_xlabel("score")
    ax.set_ylabel("fraction")
    ax.legend(fontsize=7)


def _draw_sweep(ax, series):
    groups = {}
    for p in series.points:
        groups.setdefault(p.labels.get("metric", "sum"), []).append(p)
    for name, points in groups.items():
        ax.plot(
            [p.values[0] for p in points],
            [float("nan") if p.missing else p.values[1] for p in points],
            label=name,
        )
    minimum = series.annotations.get("minimum")
    if minimum:
        ax.axvline(minimum["cutoff"], linestyle="--", color="black")
    ax.set_xlabel("cutoff")
    ax.set_ylabel("parity_loss")
    ax.legend(fontsize=7)


def _draw(ax, series):
    kind = series.kind
    if kind is PlotKind.FAIRNESS_CHECK_BARS:
        _draw_fairness_check(ax, series)
    elif kind is PlotKind.METRIC_SCORES:
        _draw_bars(ax, series, "model", "metric", "subgroup")
    elif kind is PlotKind.RADAR:
        _draw_bars(ax, series, "model", "metric")
    elif kind is PlotKind.HEATMAP:
        _draw_heatmap(ax, series)
    elif kind is PlotKind.CHOOSE_METRIC:
        _draw_bars(ax, series, "model")
    elif kind is PlotKind.STACK_METRICS:
        _draw_stack(ax, series)
    elif kind is PlotKind.GROUP_METRIC:
        _draw_bars(ax, series, "model", "panel", "subgroup")
    elif kind is PlotKind.PCA:
        _draw_scatter(ax, series, "name")
    elif kind is PlotKind.PERFORMANCE_AND_FAIRNESS:
        _draw_scatter(ax, series, "model")
    elif kind is PlotKind.DENSITY:
        _draw_density(ax, series)
    else:
        _draw_sweep(ax, series)


def render_svg(series, path):
    """Render one series to a standalone SVG file"""
    plt.rcParams["svg.hashsalt"] = SVG_HASH_SALT
    fig, ax = plt.subplots(figsize=(8, 6))
    try:
        _draw(ax, series)
        ax.set_title(series.kind.value)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as e:
        raise FairAuditError(f"Failed to write {path}: {e.strerror or e}") from e
    finally:
        plt.close(fig)

    logger.info(f"Wrote {path}")
    return path


def emit_plot_bundle(series, directory, render=False):
    """Write one JSON document (and optionally an SVG) per series plus a manifest"""
    manifest = {"series": []}
    if not series:
        return manifest

    used = {}
    for item in series:
        # Repeated kinds get a numeric suffix
        count = used.get(item.kind, 0)
        used[item.kind] = count + 1
        name = item.kind.value if count == 0 else f"{item.kind.value}_{count + 1}"

        entry = {"kind": item.kind.value, "json": f"{name}.json"}
        write_json(os.path.join(directory, entry["json"]), item.to_dict())
        if render:
            entry["svg"] = f"{name}.svg"
            render_svg(item, os.path.join(directory, entry["svg"]))
        manifest["series"].append(entry)

    write_json(os.path.join(directory, MANIFEST_NAME), manifest)
    return manifest
