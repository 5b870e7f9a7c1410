"""Instance files and report files.

Instance files are UTF-8 JSON in one of two shapes::

    {"x": [[re, im], ...], "ys": [[[re, im], ...], ...], "c": [[re, im], ...]}
    {"gram": [[[re, im], ...], ...], "proj": [[re, im], ...], "norm_x_sq": 1.0, "c": [...]}

``c`` is optional in both.  An optional ``"params"`` object (``p``, ``alpha``,
``gamma``) and a free-form ``"audit"`` object may accompany either shape; audit
counterexamples use them so a counterexample file is itself a valid instance.

Complex numbers are always ``[re, im]`` pairs.  Floats are written with
``repr`` precision, so parse(emit(x)) is exact.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .gramcore import GramError, Instance
from .exponents import ExponentError, HolderParams

COORD_KEYS = {"x", "ys"}
GRAM_KEYS = {"gram", "proj", "norm_x_sq"}
EXTRA_KEYS = {"c", "params", "audit"}

TABULAR_COLUMNS = ("name", "branch", "form", "p", "q", "alpha", "beta", "gamma", "delta", "value", "lhs", "slack",
                   "tightness")


class FormatError(ValueError):
    """Malformed instance or report file; the message names the offending field."""


def _reject_constant(tok: str):
    raise FormatError(f"non-finite number {tok!r} is not allowed")


def loads_json(text: str) -> Any:
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise FormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def dumps_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def complex_to_pair(z: complex) -> List[float]:
    z = complex(z)
    return [z.real, z.imag]


def _pair(value, where: str) -> complex:
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise FormatError(f"{where}: expected a [re, im] pair of numbers, got {value!r}")
    re, im = float(value[0]), float(value[1])
    if not (math.isfinite(re) and math.isfinite(im)):
        raise FormatError(f"{where}: non-finite entry")
    return complex(re, im)


def _vector(value, where: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise FormatError(f"{where}: expected a non-empty list of [re, im] pairs")
    return np.array([_pair(v, f"{where}[{k}]") for k, v in enumerate(value)], dtype=complex)


def _matrix(value, where: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise FormatError(f"{where}: expected a non-empty list of rows")
    return np.array([_vector(row, f"{where}[{i}]") for i, row in enumerate(value)], dtype=complex)


def instance_from_dict(doc: Dict[str, Any]) -> Instance:
    if not isinstance(doc, dict):
        raise FormatError("instance file must hold a JSON object")
    keys = set(doc)
    unknown = keys - COORD_KEYS - GRAM_KEYS - EXTRA_KEYS
    if unknown:
        raise FormatError(f"unknown field(s): {', '.join(sorted(unknown))}")
    has_coord, has_gram = bool(keys & COORD_KEYS), bool(keys & GRAM_KEYS)
    if has_coord == has_gram:
        raise FormatError("instance must use exactly one shape: {x, ys} or {gram, proj, norm_x_sq}")
    required = COORD_KEYS if has_coord else GRAM_KEYS
    missing = required - keys
    if missing:
        raise FormatError(f"missing field(s): {', '.join(sorted(missing))}")
    c = _vector(doc["c"], "c") if "c" in doc else None
    try:
        if has_coord:
            x = _vector(doc["x"], "x")
            if not isinstance(doc["ys"], list) or not doc["ys"]:
                raise FormatError("ys: expected a non-empty list of vectors")
            ys = [_vector(v, f"ys[{i}]") for i, v in enumerate(doc["ys"])]
            for i, y in enumerate(ys):
                if y.shape != x.shape:
                    raise FormatError(f"ys[{i}]: dimension {y.shape[0]} differs from x dimension {x.shape[0]}")
            if c is not None and c.shape[0] != len(ys):
                raise FormatError(f"c: length {c.shape[0]} differs from number of vectors {len(ys)}")
            return Instance.from_coordinates_data(x, ys, c)
        g = _matrix(doc["gram"], "gram")
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise FormatError(f"gram: expected a square matrix, got {len(doc['gram'])} ragged rows")
        proj = _vector(doc["proj"], "proj")
        if proj.shape[0] != g.shape[0]:
            raise FormatError(f"proj: length {proj.shape[0]} differs from Gram size {g.shape[0]}")
        if c is not None and c.shape[0] != g.shape[0]:
            raise FormatError(f"c: length {c.shape[0]} differs from Gram size {g.shape[0]}")
        nx = doc["norm_x_sq"]
        if not isinstance(nx, (int, float)) or isinstance(nx, bool) or not math.isfinite(nx) or nx < 0:
            raise FormatError(f"norm_x_sq: expected a finite nonnegative number, got {nx!r}")
        return Instance.from_gram_data(g, proj, float(nx), c)
    except GramError as exc:
        raise FormatError(str(exc)) from None
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(str(exc)) from None


def params_from_dict(doc: Optional[Dict[str, Any]]) -> Optional[HolderParams]:
    if doc is None:
        return None
    if not isinstance(doc, dict) or "p" not in doc:
        raise FormatError("params: expected an object with at least 'p'")
    try:
        return HolderParams.make(doc["p"], doc.get("alpha"), doc.get("gamma"))
    except (ExponentError, TypeError) as exc:
        raise FormatError(f"params: {exc}") from None


def params_to_dict(params: HolderParams) -> Dict[str, float]:
    out = {"p": params.pq.p}
    if params.ab is not None:
        out["alpha"] = params.ab.p
    if params.gd is not None:
        out["gamma"] = params.gd.p
    return out


def instance_to_dict(inst: Instance) -> Dict[str, Any]:
    if inst.from_coordinates:
        doc = {"x": [complex_to_pair(z) for z in inst.x],
               "ys": [[complex_to_pair(z) for z in y] for y in inst.family.vectors]}
    else:
        doc = {"gram": [[complex_to_pair(z) for z in row] for row in inst.gram.g],
               "proj": [complex_to_pair(z) for z in inst.proj.proj],
               "norm_x_sq": inst.proj.norm_x_sq}
    if inst.c is not None:
        doc["c"] = [complex_to_pair(z) for z in inst.c]
    return doc


def read_instance(text: str) -> Tuple[Instance, Optional[HolderParams], Dict[str, Any]]:
    """Parse instance text; returns the instance, embedded params (if any) and the raw document."""
    doc = loads_json(text)
    inst = instance_from_dict(doc)
    return inst, params_from_dict(doc.get("params")), doc


# -- reports ------------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def emit_tabular(rows: List[Dict[str, Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABULAR_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row.get(col)) for col in TABULAR_COLUMNS])
    return buf.getvalue()


_INT_COLS = {"branch"}
_STR_COLS = {"name", "form"}


def parse_tabular(text: str) -> List[Dict[str, Any]]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != TABULAR_COLUMNS:
        raise FormatError(f"tabular header must be {','.join(TABULAR_COLUMNS)}")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if len(rec) != len(TABULAR_COLUMNS):
            raise FormatError(f"line {lineno}: expected {len(TABULAR_COLUMNS)} columns, got {len(rec)}")
        row: Dict[str, Any] = {}
        for col, cell in zip(TABULAR_COLUMNS, rec):
            if cell == "":
                row[col] = None
            elif col in _STR_COLS:
                row[col] = cell
            elif col in _INT_COLS:
                row[col] = int(cell)
            else:
                row[col] = float(cell)
        rows.append(row)
    return rows


def emit_report(report: Dict[str, Any], fmt: str = "structured") -> str:
    if fmt == "structured":
        return dumps_json(report)
    if fmt == "tabular":
        return emit_tabular(report.get("rows", []))
    raise FormatError(f"unknown report format {fmt!r}")


def parse_report(text: str, fmt: str = "structured"):
    if fmt == "structured":
        return loads_json(text)
    if fmt == "tabular":
        return parse_tabular(text)
    raise FormatError(f"unknown report format {fmt!r}")
