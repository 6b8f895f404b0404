#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Plot Bundle Tests
"""

import json
import os

import pytest

from app.fairness.audit import fairness_check
from app.plots.render import MANIFEST_NAME, emit_plot_bundle
from app.plots.series import (
    fairness_check_view,
    heatmap_view,
    parity_loss_matrix,
    radar_view,
    score_density,
)


@pytest.fixture
def series(skewed, spec_ab):
    audit = fairness_check(skewed, spec_ab)
    m = parity_loss_matrix(audit)
    return [fairness_check_view(audit), radar_view(m), heatmap_view(m, normalize=True), score_density(skewed, spec_ab, "m")]


def read_all(directory):
    return {name: (directory / name).read_bytes() for name in sorted(os.listdir(directory))}


class TestEmitPlotBundle:

    def test_empty_list_writes_nothing(self, tmp_path):
        manifest = emit_plot_bundle([], str(tmp_path))
        assert manifest == {"series": []}
        assert os.listdir(tmp_path) == []

    def test_one_document_per_series(self, tmp_path, series):
        manifest = emit_plot_bundle(series, str(tmp_path))
        assert sorted(os.listdir(tmp_path)) == sorted(
            ["fairness_check_bars.json", "radar.json", "heatmap.json", "density.json", MANIFEST_NAME]
        )
        assert [entry["kind"] for entry in manifest["series"]] == ["fairness_check_bars", "radar", "heatmap", "density"]

        with open(tmp_path / "radar.json", encoding="utf-8") as handle:
            radar = json.load(handle)
        assert radar["kind"] == "radar"
        # Undefined parity losses travel as null and stay flagged
        missing = [p for p in radar["points"] if p["missing"]]
        assert missing and all(p["values"] == [None] for p in missing)

    def test_repeated_kinds_get_suffix(self, tmp_path, series):
        manifest = emit_plot_bundle([series[1], series[1]], str(tmp_path))
        assert [entry["json"] for entry in manifest["series"]] == ["radar.json", "radar_2.json"]

    def test_bytes_are_stable(self, tmp_path, series):
        first, second = tmp_path / "first", tmp_path / "second"
        emit_plot_bundle(series, str(first))
        emit_plot_bundle(series, str(second))
        assert read_all(first) == read_all(second)

    def test_render_writes_svg(self, tmp_path, series):
        manifest = emit_plot_bundle(series, str(tmp_path), render=True)
        for entry in manifest["series"]:
            with open(tmp_path / entry["svg"], encoding="utf-8") as handle:
                assert "<svg" in handle.read()

    def test_rendered_svg_is_stable(self, tmp_path, series):
        first, second = tmp_path / "first", tmp_path / "second"
        emit_plot_bundle(series[:2], str(first), render=True)
        emit_plot_bundle(series[:2], str(second), render=True)
        assert read_all(first) == read_all(second)
