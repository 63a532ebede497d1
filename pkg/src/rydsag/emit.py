"""Deterministic CSV and JSON emission.

All files use UTF-8, LF line endings, comma delimiters and dot decimals.
Floats are written with 9 significant digits in CSV; JSON keys are
sorted and non-finite numbers are replaced by the string "undefined" so
every emitted file is strict JSON and byte-stable for a given payload.
"""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .errors import InvalidParameterError

UNDEFINED = "undefined"


def format_cell(value):
    """One CSV cell: 9-significant-digit floats, plain ints and strings."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".9g")
    if isinstance(value, str):
        return value
    raise InvalidParameterError(f"cannot format a {type(value).__name__} CSV cell")


def write_csv(path, header, rows):
    """Write a header and iterable of rows; returns the path."""
    header = list(header)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            cells = [format_cell(value) for value in row]
            if len(cells) != len(header):
                raise InvalidParameterError(
                    f"row width {len(cells)} does not match header width {len(header)}"
                )
            writer.writerow(cells)
    return path


def sanitize(value):
    """Recursively convert a payload into strict-JSON-serializable data."""
    if isinstance(value, dict):
        return {str(key): sanitize(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [sanitize(item) for item in value]
    if isinstance(value, np.ndarray):
        return [sanitize(item) for item in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else UNDEFINED
    if value is None or isinstance(value, str):
        return value
    raise InvalidParameterError(
        f"cannot serialize a {type(value).__name__} value to JSON"
    )


def write_json(path, payload):
    """Write a sanitized, sorted, indented JSON document; returns the path."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        json.dump(sanitize(payload), handle, indent=2, sort_keys=True, allow_nan=False)
        handle.write("\n")
    return path
