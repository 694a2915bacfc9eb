"""CSV and JSON plumbing for matrices and run summaries.

Matrices travel as dense CSV with full-precision floats.  Problem
definitions load from JSON with entries inline or referenced by CSV path.
Summaries are JSON with sorted keys so reruns diff cleanly.
"""

from __future__ import annotations

import csv
import json
import os
from typing import Any

import numpy as np

__all__ = [
    "write_matrix_csv",
    "read_matrix_csv",
    "load_matrix",
    "write_summary_json",
    "jsonable",
]


def write_matrix_csv(path: str, mat) -> str:
    """Dense CSV, one row per line, full repr precision."""
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    with open(path, "w", newline="") as fh:
        for row in mat:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")
    return path


def read_matrix_csv(path: str) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for line_no, rec in enumerate(csv.reader(fh), start=1):
            if not rec or (len(rec) == 1 and not rec[0].strip()):
                continue
            try:
                rows.append([float(v) for v in rec])
            except ValueError as exc:
                raise ValueError(f"{path}:{line_no}: non-numeric entry ({exc})") from exc
    if not rows:
        raise ValueError(f"{path}: no numeric rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path}: ragged rows; expected width {width}")
    return np.asarray(rows, dtype=float)


def load_matrix(path: str) -> np.ndarray:
    """Load a matrix from dense CSV or a JSON problem definition.

    JSON form: {"entries": [[...], ...]} inline, or {"csv": "relative.csv"}
    resolved against the JSON file's directory.
    """
    if path.endswith(".json"):
        with open(path) as fh:
            doc = json.load(fh)
        if "entries" in doc:
            return np.asarray(doc["entries"], dtype=float)
        if "csv" in doc:
            return read_matrix_csv(os.path.join(os.path.dirname(path), doc["csv"]))
        raise ValueError(f"{path}: JSON needs an 'entries' or 'csv' field")
    return read_matrix_csv(path)


def jsonable(obj: Any) -> Any:
    """Recursively convert to JSON-safe types; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else None
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    return obj


def write_summary_json(path: str, summary: dict) -> str:
    with open(path, "w") as fh:
        json.dump(jsonable(summary), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return path
