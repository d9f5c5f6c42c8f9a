"""JSON and CSV formats for complexes, covers, point clouds, barcodes and reports.

Output is deterministic: sorted keys, fixed orderings, and floats written as
the shortest decimal that round-trips.
"""
import csv
import json
import math
import warnings

import numpy as np

from .complex import Cell, ComplexError, FilteredComplex, FiltrationGrid
from .covers import Cover, CoverError

SCHEMA = {"complex": "mvss.complex/1", "cover": "mvss.cover/1"}


class FormatError(ValueError):
    pass


def _plain(x):
    """numpy scalars/arrays, tuples, sets and inf -> plain JSON values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted(_plain(v) for v in x)
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return None
        return x
    return x


def dumps(obj):
    return json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"), allow_nan=False)


def write_json(obj, path=None):
    text = dumps(obj) + "\n"
    if path is None or path == "-":
        return text
    with open(path, "w") as fh:
        fh.write(text)
    return text


def _load(path_or_obj):
    if isinstance(path_or_obj, dict):
        return path_or_obj
    try:
        with open(path_or_obj) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path_or_obj}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    except OSError as exc:
        raise FormatError(f"{path_or_obj}: {exc.strerror}") from exc


def _tuplify(x):
    if isinstance(x, list):
        return tuple(_tuplify(v) for v in x)
    return x


# complexes
def complex_to_json(K):
    cells = []
    for c in K.cells:
        d = {"id": c.id, "dim": c.dim, "birth": c.birth, "boundary": [[f, k] for f, k in c.boundary]}
        if c.label is not None:
            d["label"] = c.label
        cells.append(d)
    return {"schema": SCHEMA["complex"], "field": K.field, "grid": list(K.grid), "cells": cells}


def complex_from_json(obj):
    for key in ("field", "grid", "cells"):
        if key not in obj:
            raise FormatError(f"complex: missing field '{key}'")
    cells = []
    for i, c in enumerate(obj["cells"]):
        for key in ("id", "dim", "birth"):
            if key not in c:
                raise FormatError(f"complex: cells[{i}] missing field '{key}'")
        if c["id"] != i:
            raise FormatError(f"complex: cells[{i}] has id {c['id']}; ids must be 0..n-1 in order")
        bd = c.get("boundary", [])
        if any(not isinstance(e, list) or len(e) != 2 for e in bd):
            raise FormatError(f"complex: cells[{i}].boundary must be a list of [face-id, coeff]")
        cells.append(Cell(int(c["id"]), int(c["dim"]), int(c["birth"]),
                          tuple((int(f), int(k)) for f, k in bd), _tuplify(c.get("label"))))
    try:
        return FilteredComplex(cells, FiltrationGrid(obj["grid"]), int(obj["field"]))
    except ComplexError as exc:
        raise FormatError(f"complex: {exc}") from exc


def parse_complex(path):
    return complex_from_json(_load(path))


# covers
def cover_to_json(U):
    return {"schema": SCHEMA["cover"], "sets": {n: sorted(s) for n, s in zip(U.names, U.sets)}}


def cover_from_json(obj, K):
    if "sets" not in obj or not isinstance(obj["sets"], dict):
        raise FormatError("cover: missing object field 'sets'")
    names, sets = [], []
    closed = True
    for name in sorted(obj["sets"]):
        ids = obj["sets"][name]
        for c in ids:
            if not isinstance(c, int) or not 0 <= c < len(K.cells):
                raise FormatError(f"cover: set '{name}' references unknown cell id {c}")
        s = K.closure(ids)
        if len(s) != len(set(ids)):
            closed = False
        names.append(name)
        sets.append(s)
    if not closed:
        warnings.warn("cover sets were closed under faces")
    try:
        U = Cover(K, sets, names)
    except CoverError as exc:
        raise FormatError(f"cover: {exc}") from exc
    U.auto_closed = not closed
    return U


def parse_cover(path, K):
    return cover_from_json(_load(path), K)


# point clouds
def parse_points(path):
    rows = []
    with open(path, newline="") as fh:
        for n, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append([float(x) for x in row])
            except ValueError as exc:
                raise FormatError(f"{path}: line {n}: {exc}") from exc
    if not rows:
        raise FormatError(f"{path}: no points")
    if len({len(r) for r in rows}) != 1:
        raise FormatError(f"{path}: rows have different lengths")
    return np.array(rows, dtype=float)


def write_points(P, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in np.atleast_2d(P):
            w.writerow([repr(float(x)) for x in row])


# barcodes and pages
def bars_json(bc):
    return [[_num(b), None if math.isinf(d) else _num(d)] for b, d in bc.bars]


def barcode_json(bc):
    return {"dim": bc.dim, "bars": bars_json(bc)}


def _num(x):
    x = float(x)
    return int(x) if x.is_integer() else x


def pages_json(ss, pages, with_differentials=False):
    return {"pages": [ss.to_json(r, with_differentials) for r in pages], "stable_page": ss.stable_page}
