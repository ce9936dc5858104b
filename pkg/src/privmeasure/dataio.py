"""Dataset ingestion and deterministic CSV/JSON output."""

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError
from .measures import FiniteMetricSpace, cube_space

SCHEMA_VERSION = "privmeasure.provenance/1"
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class Dataset:
    """Points of a dataset as indices into ``space``; ``weights`` set for measure inputs."""

    space: FiniteMetricSpace
    points: np.ndarray
    weights: np.ndarray = None

    @property
    def n(self):
        return len(self.points)


def _parse_float(text, path, row):
    try:
        value = float(text)
    except ValueError:
        raise InputError(f"not a number: {text!r}", row=row, path=path) from None
    if not math.isfinite(value):
        raise InputError(f"non-finite value {text!r}", row=row, path=path)
    return value


def _check_coords(rows, path, d, weighted):
    width = len(rows[0][1])
    for row, vals in rows:
        if len(vals) != width:
            raise InputError(f"expected {width} columns, found {len(vals)}", row=row, path=path)
    dim = width - 1 if weighted else width
    if dim < 1:
        raise InputError("rows have no coordinate columns", row=rows[0][0], path=path)
    if d is not None and dim != d:
        raise InputError(f"expected dimension {d}, found {dim}", row=rows[0][0], path=path)
    for row, vals in rows:
        coords = vals[:dim]
        if min(coords) < 0 or max(coords) > 1:
            raise InputError("coordinate outside [0, 1]", row=row, path=path)
        if weighted and vals[-1] < 0:
            raise InputError("negative weight", row=row, path=path)
    return dim


def _coords_dataset(rows, path, d, weighted):
    dim = _check_coords(rows, path, d, weighted)
    table = np.array([vals for _, vals in rows], dtype=np.float64)
    space = cube_space(table[:, :dim])
    points = np.arange(len(table))
    if not weighted:
        return Dataset(space, points)
    w = table[:, dim]
    if w.sum() <= 0:
        raise InputError("weights sum to zero", path=path)
    return Dataset(space, points, w / w.sum())


def _matrix_dataset(matrix, path, points=None):
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise InputError("distance matrix must be square and nonempty", path=path)
    for i in range(len(m)):
        if not np.all(np.isfinite(m[i])) or np.any(m[i] < 0):
            raise InputError("distances must be finite and nonnegative", row=i + 1, path=path)
        if m[i, i] != 0:
            raise InputError("nonzero diagonal entry", row=i + 1, path=path)
        bad = np.flatnonzero(np.abs(m[i] - m[:, i]) > SYMMETRY_TOL)
        if bad.size:
            raise InputError(f"matrix is not symmetric at column {bad[0] + 1}", row=i + 1,
                             path=path)
    space = FiniteMetricSpace(matrix=m)
    if points is None:
        points = np.arange(len(m))
    else:
        points = np.asarray(points, dtype=np.int64)
        if points.size == 0 or points.min() < 0 or points.max() >= len(m):
            raise InputError("dataset indices out of range", path=path)
    return Dataset(space, points)


def _read_csv(path, d, weighted, matrix):
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row, record in enumerate(csv.reader(fh), start=1):
            if not record or all(not c.strip() for c in record):
                continue
            if record[0].lstrip().startswith("#"):
                continue
            rows.append((row, [_parse_float(c.strip(), path, row) for c in record]))
    if not rows:
        raise InputError("no data rows", path=path)
    if matrix:
        for row, vals in rows:
            if len(vals) != len(rows):
                raise InputError("distance matrix must be square", row=row, path=path)
        return _matrix_dataset([vals for _, vals in rows], path)
    return _coords_dataset(rows, path, d, weighted)


def _read_json(path, d, weighted):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc.msg}", row=exc.lineno, path=path) from None
    if isinstance(doc, list):
        doc = {"points": doc}
    if not isinstance(doc, dict):
        raise InputError("expected an object or a list of points", path=path)
    if "distance_matrix" in doc:
        return _matrix_dataset(doc["distance_matrix"], path, doc.get("dataset"))
    pts = doc.get("points")
    if not pts:
        raise InputError("no points", path=path)
    rows = []
    for row, vals in enumerate(pts, start=1):
        if not isinstance(vals, (list, tuple)):
            vals = [vals]
        rows.append((row, [_parse_float(v, path, row) for v in vals]))
    if "weights" in doc:
        if len(doc["weights"]) != len(rows):
            raise InputError("weights and points differ in length", path=path)
        rows = [(r, v + [_parse_float(w, path, r)]) for (r, v), w in zip(rows, doc["weights"])]
        weighted = True
    return _coords_dataset(rows, path, d, weighted)


def ingest(path, format=None, d=None, weighted=False, matrix=False):
    """Read a dataset from CSV or JSON.

    CSV rows are coordinates in ``[0,1]^d`` (the last column is a weight when
    ``weighted``), or the rows of a distance matrix when ``matrix``. JSON is a
    list of points or an object with ``points`` (optional ``weights``) or with
    ``distance_matrix`` (optional ``dataset`` index list).
    """
    path = str(path)
    fmt = format or Path(path).suffix.lstrip(".").lower()
    if fmt not in ("csv", "json"):
        raise InputError(f"unknown format {fmt!r}", path=path)
    if not Path(path).is_file():
        raise InputError("no such file", path=path)
    if fmt == "csv":
        return _read_csv(path, d, weighted, matrix)
    return _read_json(path, d, weighted)


def format_float(x):
    return repr(float(x))


def write_csv(path, header, rows):
    """UTF-8, comma separated, '\\n'-terminated, floats in shortest round-trip form."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(format_float(v) if isinstance(v, (float, np.floating)) else str(v)
                              for v in r) + "\n")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def write_json(path, payload):
    doc = {"schema": SCHEMA_VERSION, **_plain(payload)}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
