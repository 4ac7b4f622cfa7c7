"""Grouped unit-vector data files: parsing, validation, serialization.

The canonical interchange format is CSV with header ``group,x1,...,xk``; the
JSON mirror is a list of objects ``{"group": label, "coords": [x1, ..., xk]}``.
Rows are re-normalized on ingest: instrument data carries rounding, so small
norm deviations (up to 1e-3) are repaired, while larger ones indicate
non-spherical data and are rejected.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .errors import (
    DataFormatError,
    MixedDimensionsError,
    NonUnitRowError,
    TooFewGroupsError,
)
from .estimators import MultiSample

REJECT_TOL = 1e-3


def _rows_from_csv(text: str) -> list[tuple[str, list[float]]]:
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise DataFormatError("empty data file")
    header = [cell.strip().lower() for cell in rows[0]]
    if header[:1] != ["group"] or len(header) < 3:
        raise DataFormatError("CSV header must be 'group,x1,...,xk' with k >= 2")
    out = []
    for number, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise MixedDimensionsError(f"row {number}: expected {len(header) - 1} coordinates")
        try:
            coords = [float(cell) for cell in row[1:]]
        except ValueError as exc:
            raise DataFormatError(f"row {number}: non-numeric coordinate") from exc
        out.append((row[0].strip(), coords))
    return out


def _rows_from_json(text: str) -> list[tuple[str, list[float]]]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, list) or not data:
        raise DataFormatError("JSON data must be a nonempty list of row objects")
    out = []
    for number, item in enumerate(data, start=1):
        if not isinstance(item, dict) or "group" not in item or "coords" not in item:
            raise DataFormatError(f"row {number}: expected {{'group': ..., 'coords': [...]}}")
        coords = [float(v) for v in item["coords"]]
        out.append((str(item["group"]), coords))
    return out


def parse_rows(
    rows: Iterable[tuple[str, list[float]]], *, unit_tol: float = 1e-6
) -> MultiSample:
    """Group labeled coordinate rows into a MultiSample (first-appearance order).

    Every row is re-normalized to unit length; a row whose norm deviates from
    1 by more than ``REJECT_TOL`` raises NonUnitRowError.  ``unit_tol`` is the
    deviation regarded as exact (below it no repair is considered to have
    happened); it only affects reporting, not acceptance.
    """
    groups: dict[str, list[np.ndarray]] = {}
    k = None
    for number, (label, coords) in enumerate(rows, start=1):
        vec = np.asarray(coords, dtype=float)
        if k is None:
            k = vec.size
            if k < 2:
                raise MixedDimensionsError(f"row {number}: needs k >= 2 coordinates")
        elif vec.size != k:
            raise MixedDimensionsError(f"row {number}: {vec.size} coordinates, expected {k}")
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > REJECT_TOL:
            raise NonUnitRowError(number, norm)
        groups.setdefault(label, []).append(vec / norm)
    if len(groups) < 2:
        raise TooFewGroupsError(f"need at least 2 distinct group labels, got {len(groups)}")
    return MultiSample(tuple(np.vstack(vectors) for vectors in groups.values()))


def parse_data(path, fmt: Optional[str] = None, *, unit_tol: float = 1e-6) -> MultiSample:
    """Read a grouped data file (CSV or JSON) into a MultiSample.

    ``fmt`` defaults to the file extension; anything that is not ``.json`` is
    treated as CSV.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if fmt is None:
        fmt = "json" if path.suffix.lower() == ".json" else "csv"
    fmt = fmt.lower()
    if fmt == "csv":
        rows = _rows_from_csv(text)
    elif fmt == "json":
        rows = _rows_from_json(text)
    else:
        raise DataFormatError(f"unknown format {fmt!r} (expected 'csv' or 'json')")
    return parse_rows(rows, unit_tol=unit_tol)


def format_vectors_csv(vectors: np.ndarray, group: str = "g1") -> str:
    """Serialize unit vectors as canonical CSV at 17 significant digits."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    k = vectors.shape[1]
    lines = ["group," + ",".join(f"x{i + 1}" for i in range(k))]
    for row in vectors:
        lines.append(group + "," + ",".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"
