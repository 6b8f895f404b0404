#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Deterministic JSON Serialization Module
"""

import enum
import json
import logging
import math
import os
from dataclasses import asdict, is_dataclass

import numpy as np

from app.utils.errors import FairAuditError

logger = logging.getLogger(__name__)


def to_jsonable(value):
    """Convert numpy, enum and dataclass values into plain JSON types"""
    if isinstance(value, enum.Enum):
        return value.value
    if is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(asdict(value))
    if isinstance(value, dict):
        return {str(to_jsonable(k)): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        # Undefined values travel as null
        return value if math.isfinite(value) else None
    return value


def dumps(payload):
    """Serialize payload to stable, sorted, newline-terminated JSON"""
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, payload):
    """Write payload as deterministic JSON"""
    try:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(dumps(payload))
    except OSError as e:
        raise FairAuditError(f"Failed to write {path}: {e.strerror or e}") from e

    logger.info(f"Wrote {path}")
    return path


def read_json(path):
    """Read a JSON document"""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as e:
        raise FairAuditError(f"Failed to read {path}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise FairAuditError(f"{path} is not valid JSON: {e}") from e


def write_text(path, text):
    """Write a UTF-8 text file"""
    try:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    except OSError as e:
        raise FairAuditError(f"Failed to write {path}: {e.strerror or e}") from e

    logger.info(f"Wrote {path}")
    return path
