#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Audit Dataset Module

Defines the dataset contract every other module consumes: true labels,
protected levels, per-model scores and optional features. Values are
immutable after construction.
"""

import io
import logging
import math
import os
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple

import numpy as np
import pandas as pd

from app.utils.errors import FairAuditError, ParameterError, RowError, SchemaError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_CUTOFF = 0.5
SCORE_PREFIX = "score_"


def parse_score_flag(flag):
    """Split a 'label=column' score flag; a bare column drops its score_ prefix"""
    if "=" in flag:
        label, column = (part.strip() for part in flag.split("=", 1))
    else:
        column = flag.strip()
        label = column[len(SCORE_PREFIX):] if column.startswith(SCORE_PREFIX) else column

    if not label or not column:
        raise SchemaError(f"Invalid score mapping '{flag}', expected label=column")
    return label, column


@dataclass(frozen=True)
class DatasetSchema:
    """Column roles of a delimited input file"""

    label: str
    protected: str
    scores: Tuple[Tuple[str, str], ...] = ()
    favorable: Optional[str] = None
    unfavorable: Optional[str] = None
    features: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        labels = [label for label, _ in self.scores]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise SchemaError(f"Models must have different labels, duplicated: {', '.join(duplicates)}")
        if any(not label for label in labels):
            raise SchemaError("Model labels must be non-empty")

    @classmethod
    def from_flags(cls, label, protected, scores=(), favorable=None, unfavorable=None, features=None):
        """Build a schema from command-line style flags"""
        return cls(
            label=label,
            protected=protected,
            scores=tuple(parse_score_flag(flag) for flag in scores),
            favorable=favorable,
            unfavorable=unfavorable,
            features=tuple(features) if features else None,
        )

    @property
    def score_columns(self):
        return dict(self.scores)

    def with_score(self, label, column):
        """Return a schema with one more model score column"""
        return DatasetSchema(
            label=self.label,
            protected=self.protected,
            scores=self.scores + ((label, column),),
            favorable=self.favorable,
            unfavorable=self.unfavorable,
            features=self.features,
        )


def _readonly(values, dtype=None):
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def _normalize_feature(column):
    """Store a feature the way load_dataset reads it: finite numbers as float64, else strings"""
    values = column.to_numpy()
    if values.dtype.kind in "iuf" and np.isfinite(values.astype(np.float64)).all():
        return column.astype(np.float64)
    text = [str(value) for value in values]
    if _is_numeric(text):
        return pd.Series([float(value) for value in text], index=column.index, dtype=np.float64)
    return pd.Series(text, index=column.index, dtype=object)


@dataclass(frozen=True, eq=False)
class AuditDataset:
    """Rows of (true label, protected level, features, per-model scores)"""

    y_true: np.ndarray
    protected: np.ndarray
    scores: Dict[str, np.ndarray]
    features: pd.DataFrame = field(default_factory=pd.DataFrame)
    schema: Optional[DatasetSchema] = None
    label_values: Tuple[str, str] = ("0", "1")

    def __post_init__(self):
        y_true = _readonly(self.y_true, dtype=np.int64)
        protected = _readonly([str(level) for level in self.protected], dtype=object)
        scores = {str(label): _readonly(values, dtype=np.float64) for label, values in self.scores.items()}
        features = pd.DataFrame(index=range(len(y_true)))
        if len(self.features.columns):
            source = self.features.reset_index(drop=True)
            features = pd.DataFrame({name: _normalize_feature(source[name]) for name in source.columns})

        object.__setattr__(self, "y_true", y_true)
        object.__setattr__(self, "protected", protected)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "features", features)

        if self.schema is None:
            default_schema = DatasetSchema(
                label="y",
                protected="protected",
                scores=tuple((label, f"{SCORE_PREFIX}{label}") for label in scores),
            )
            object.__setattr__(self, "schema", default_schema)

        self._validate()

    def _validate(self):
        n = len(self.y_true)
        if n == 0:
            raise ValidationError("Dataset is empty")
        if len(self.protected) != n:
            raise ValidationError(f"protected has {len(self.protected)} values, expected {n}")
        if len(self.features) != n:
            raise ValidationError(f"features have {len(self.features)} rows, expected {n}")
        if not np.isin(self.y_true, (0, 1)).all():
            raise ValidationError("y_true must contain only 0 and 1")

        for label, values in self.scores.items():
            if not label:
                raise ValidationError("Model labels must be non-empty")
            if len(values) != n:
                raise ValidationError(f"scores of '{label}' have {len(values)} values, expected {n}")
            if not (np.isfinite(values).all() and (values >= 0).all() and (values <= 1).all()):
                raise ValidationError(f"scores of '{label}' must lie in [0, 1]")

        if len(self.levels) < 2:
            raise ValidationError(
                f"Protected attribute needs >=2 levels, found {len(self.levels)}: {', '.join(self.levels)}"
            )

    @property
    def row_count(self):
        return len(self.y_true)

    @property
    def levels(self):
        return sorted(set(self.protected.tolist()))

    @property
    def model_labels(self):
        return list(self.scores)

    def column(self, name):
        """Get a feature or the protected column by name"""
        if name in self.features.columns:
            return self.features[name]
        if name == self.schema.protected:
            return pd.Series(self.protected, name=name)
        raise SchemaError(f"Unknown feature '{name}', available: {', '.join(self.features.columns)}")

    def take(self, indices):
        """Materialize the rows at indices (repeats allowed) as a new dataset"""
        indices = np.asarray(indices, dtype=np.int64)
        return AuditDataset(
            y_true=self.y_true[indices],
            protected=self.protected[indices],
            scores={label: values[indices] for label, values in self.scores.items()},
            features=self.features.iloc[indices].reset_index(drop=True),
            schema=self.schema,
            label_values=self.label_values,
        )

    def with_feature(self, name, values):
        """Return a copy with a feature column added or replaced"""
        features = self.features.copy()
        features[name] = np.asarray(values)
        schema = self.schema
        if schema.features is not None and name not in schema.features:
            schema = DatasetSchema(
                label=schema.label, protected=schema.protected, scores=schema.scores,
                favorable=schema.favorable, unfavorable=schema.unfavorable,
                features=schema.features + (name,),
            )
        return AuditDataset(
            y_true=self.y_true, protected=self.protected, scores=self.scores,
            features=features, schema=schema, label_values=self.label_values,
        )

    def with_scores(self, label, values, column=None):
        """Return a copy with a model's scores added or replaced"""
        scores = dict(self.scores)
        schema = self.schema
        if label not in scores:
            schema = schema.with_score(label, column or f"{SCORE_PREFIX}{label}")
        scores[label] = values
        return AuditDataset(
            y_true=self.y_true, protected=self.protected, scores=scores,
            features=self.features, schema=schema, label_values=self.label_values,
        )

    def equals(self, other):
        """Compare the data content of two datasets"""
        return (
            isinstance(other, AuditDataset)
            and np.array_equal(self.y_true, other.y_true)
            and np.array_equal(self.protected, other.protected)
            and list(self.scores) == list(other.scores)
            and all(np.array_equal(self.scores[k], other.scores[k]) for k in self.scores)
            and self.features.equals(other.features)
        )


@dataclass(frozen=True)
class ProtectedSpec:
    """Privileged level and the ordered unprivileged levels"""

    privileged: str
    unprivileged: Tuple[str, ...]

    @property
    def levels(self):
        return (self.privileged,) + tuple(self.unprivileged)


class CutoffMap(Mapping):
    """Per-subgroup classification cutoffs, each strictly inside (0, 1)"""

    def __init__(self, cutoffs):
        values = {}
        for level, value in dict(cutoffs).items():
            value = float(value)
            if not 0.0 < value < 1.0:
                raise ParameterError(f"Cutoff for '{level}' must lie in (0, 1), got {value}")
            values[str(level)] = value
        self._values = dict(sorted(values.items()))

    def __getitem__(self, level):
        return self._values[level]

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)

    def __eq__(self, other):
        return isinstance(other, Mapping) and dict(self) == dict(other)

    def __hash__(self):
        return hash(tuple(self._values.items()))

    def __repr__(self):
        return f"CutoffMap({self._values!r})"

    def replace(self, level, value):
        """Return a map with one subgroup's cutoff changed"""
        return CutoffMap({**self._values, level: value})

    @property
    def differs(self):
        """Whether subgroups are classified with different cutoffs"""
        return len(set(self._values.values())) > 1


def default_cutoffs(d):
    """Cutoff 0.5 for every protected level"""
    return CutoffMap({level: DEFAULT_CUTOFF for level in d.levels})


def make_cutoffs(d, overrides=None):
    """Apply level=value overrides on top of the default cutoffs"""
    cutoffs = dict(default_cutoffs(d))
    for level, value in (overrides or {}).items():
        if level not in cutoffs:
            raise ValidationError(f"Cutoff given for unknown level '{level}', available: {', '.join(d.levels)}")
        cutoffs[level] = value
    return CutoffMap(cutoffs)


def _parse_floats(raw, column, check_range):
    """Parse a column of strings into floats with row-level errors"""
    values = np.empty(len(raw), dtype=np.float64)
    for row, text in enumerate(raw):
        if text == "":
            raise RowError(row, column, "missing value")
        try:
            value = float(text)
        except ValueError:
            raise RowError(row, column, f"non-numeric value '{text}'")
        if check_range and not (math.isfinite(value) and 0.0 <= value <= 1.0):
            raise RowError(row, column, f"score {text} outside [0, 1]")
        values[row] = value
    return values


def _is_numeric(raw):
    try:
        return all(math.isfinite(float(text)) for text in raw)
    except ValueError:
        return False


def _parse_labels(raw, schema):
    """Map raw label strings onto 1 (favorable) and 0"""
    y_true = np.empty(len(raw), dtype=np.int64)

    if schema.favorable is None:
        for row, text in enumerate(raw):
            if text not in ("0", "1"):
                message = "missing value" if text == "" else f"label '{text}' is not 0 or 1"
                raise RowError(row, schema.label, message)
            y_true[row] = int(text)
        return y_true, ("0", "1")

    unfavorable = schema.unfavorable
    for row, text in enumerate(raw):
        if text == "":
            raise RowError(row, schema.label, "missing value")
        if text == schema.favorable:
            y_true[row] = 1
            continue
        if unfavorable is None:
            unfavorable = text
        if text != unfavorable:
            raise RowError(
                row, schema.label,
                f"label '{text}' is neither '{schema.favorable}' nor '{unfavorable}'",
            )
        y_true[row] = 0

    return y_true, (unfavorable if unfavorable is not None else "0", schema.favorable)


def _source_name(source):
    return str(source) if isinstance(source, (str, os.PathLike)) else "input"


def _decode_offset(source, error):
    """Offset of the first undecodable byte in the whole file"""
    # The parser decodes in chunks, so its own offset is chunk-relative
    if isinstance(source, (str, os.PathLike)):
        try:
            with open(source, "rb") as handle:
                handle.read().decode("utf-8")
        except UnicodeDecodeError as e:
            return e.start
        except OSError:
            pass
    return error.start


def load_dataset(source, schema, require_scores=True):
    """Load and validate an AuditDataset from delimited text with a header row"""
    if require_scores and not schema.scores:
        raise SchemaError("At least one score column is required")

    # Read everything as text; parsing happens per role
    try:
        frame = pd.read_csv(source, dtype=str, keep_default_na=False, encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ValidationError(
            f"{_source_name(source)} is not valid UTF-8: byte offset {_decode_offset(source, e)}",
            hint="re-save the file with UTF-8 encoding",
        )
    except pd.errors.EmptyDataError:
        raise ValidationError("Dataset is empty")
    except pd.errors.ParserError as e:
        raise ValidationError(f"Malformed delimited input: {e}")
    except OSError as e:
        raise FairAuditError(f"Cannot read {source}: {e.strerror or e}")

    frame.columns = [str(column).strip() for column in frame.columns]

    # Validate required columns
    required = [schema.label, schema.protected] + [column for _, column in schema.scores]
    required += list(schema.features or ())
    for column in required:
        if column not in frame.columns:
            raise SchemaError(f"Missing column '{column}', available: {', '.join(frame.columns)}")

    if len(frame) == 0:
        raise ValidationError("Dataset is empty")

    frame = frame.apply(lambda col: col.str.strip())

    y_true, label_values = _parse_labels(frame[schema.label].tolist(), schema)

    protected = frame[schema.protected].tolist()
    for row, level in enumerate(protected):
        if level == "":
            raise RowError(row, schema.protected, "missing value")

    scores = {
        label: _parse_floats(frame[column].tolist(), column, check_range=True)
        for label, column in schema.scores
    }

    # Everything else is a feature unless listed explicitly
    taken = {schema.label, schema.protected} | {column for _, column in schema.scores}
    feature_columns = list(schema.features) if schema.features else [c for c in frame.columns if c not in taken]
    features = pd.DataFrame(index=range(len(frame)))
    for column in feature_columns:
        raw = frame[column].tolist()
        if _is_numeric(raw):
            features[column] = _parse_floats(raw, column, check_range=False)
        else:
            features[column] = pd.Series(raw, dtype=object)

    dataset = AuditDataset(
        y_true=y_true,
        protected=protected,
        scores=scores,
        features=features,
        schema=schema,
        label_values=label_values,
    )

    logger.info(
        f"Loaded {dataset.row_count} rows, levels: {', '.join(dataset.levels)}, "
        f"models: {', '.join(dataset.model_labels) or '-'}"
    )
    return dataset


def _format_column(values):
    if np.issubdtype(np.asarray(values).dtype, np.floating):
        return [repr(float(v)) for v in values]
    return [str(v) for v in values]


def dump_dataset(d):
    """Serialize an AuditDataset back to CSV text"""
    schema = d.schema
    columns = {
        schema.label: [d.label_values[int(y)] for y in d.y_true],
        schema.protected: d.protected.tolist(),
    }
    for name in d.features.columns:
        columns[name] = _format_column(d.features[name].to_numpy())

    score_columns = schema.score_columns
    for label, values in d.scores.items():
        columns[score_columns.get(label, f"{SCORE_PREFIX}{label}")] = _format_column(values)

    buffer = io.StringIO()
    pd.DataFrame(columns).to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def partition_subgroups(d):
    """Map each protected level to its ascending row indices"""
    return {level: np.flatnonzero(d.protected == level) for level in d.levels}


def validate_protected_spec(d, privileged):
    """Resolve the privileged level against the dataset"""
    privileged = str(privileged)
    levels = d.levels
    if privileged not in levels:
        raise ValidationError(
            f"Privileged level '{privileged}' not found, available levels: {', '.join(levels)}"
        )
    return ProtectedSpec(
        privileged=privileged,
        unprivileged=tuple(level for level in levels if level != privileged),
    )


def check_same_rows(lengths: Iterable[int]):
    """Raise when parallel sequences differ in length"""
    lengths = list(lengths)
    if len(set(lengths)) > 1:
        raise ValidationError(f"Sequences must have equal lengths, got {lengths}")
