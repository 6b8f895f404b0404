#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Shared Test Fixtures
"""

import numpy as np
import pandas as pd
import pytest

from app import create_app
from app.data.dataset import AuditDataset, ProtectedSpec


def make_dataset(y_true, protected, scores, features=None):
    """Build an AuditDataset straight from arrays"""
    return AuditDataset(
        y_true=np.asarray(y_true),
        protected=np.asarray(protected, dtype=object),
        scores={label: np.asarray(values, dtype=float) for label, values in scores.items()},
        features=pd.DataFrame(features) if features is not None else pd.DataFrame(),
    )


def write_csv(path, columns):
    """Write a dict of columns as a CSV file and return its path"""
    pd.DataFrame(columns).to_csv(path, index=False, lineterminator="\n")
    return str(path)


@pytest.fixture
def spec_ab():
    return ProtectedSpec(privileged="a", unprivileged=("b",))


@pytest.fixture
def balanced():
    """Two subgroups with identical rows: every ratio is 1"""
    y = [1, 1, 0, 0]
    s = [0.9, 0.4, 0.6, 0.1]
    return make_dataset(y + y, ["a"] * 4 + ["b"] * 4, {"m": s + s})


@pytest.fixture
def skewed():
    """Subgroup b is never predicted positive"""
    return make_dataset(
        [1, 1, 0, 0, 1, 1, 0, 0],
        ["a"] * 4 + ["b"] * 4,
        {"m": [0.9, 0.8, 0.6, 0.1, 0.3, 0.2, 0.1, 0.1]},
    )


@pytest.fixture
def app(tmp_path):
    return create_app({
        "FAIRNESS_OUTPUT_DIR": str(tmp_path / "out"),
        "LOG_LEVEL": "WARNING",
    })


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def balanced_csv(tmp_path):
    return write_csv(tmp_path / "balanced.csv", {
        "y": [1, 1, 0, 0] * 2,
        "sex": ["male"] * 4 + ["female"] * 4,
        "age": [30, 45, 22, 51, 33, 40, 28, 60],
        "score_lm": [0.9, 0.4, 0.6, 0.1] * 2,
    })


@pytest.fixture
def skewed_csv(tmp_path):
    return write_csv(tmp_path / "skewed.csv", {
        "y": [1, 1, 0, 0] * 2,
        "sex": ["male"] * 4 + ["female"] * 4,
        "age": [30, 45, 22, 51, 33, 40, 28, 60],
        "score_lm": [0.9, 0.8, 0.6, 0.1, 0.3, 0.2, 0.1, 0.1],
        "score_rf": [0.9, 0.4, 0.6, 0.1, 0.9, 0.4, 0.6, 0.1],
        "score_gbm": [0.7, 0.6, 0.2, 0.3, 0.8, 0.4, 0.7, 0.2],
    })
