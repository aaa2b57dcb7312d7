"""Reading and writing tensors in the long-csv and tensor-json formats.

long-csv
    Header ``entity,dimension,t,value``; one row per observed cell, rows in
    any order, ``t`` a 0-based integer. Missing cells are zero-filled.
tensor-json
    ``{"time_unit": str, "dimensions": [str], "entities": [{"id": str,
    "series": [[float, ...], ...]}]}`` with ``series`` laid out D x T.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import ParseError, ShapeError
from .tensor import SeriesTensor

FORMATS = ("long-csv", "tensor-json")
CSV_HEADER = ["entity", "dimension", "t", "value"]


def guess_format(path) -> str:
    return "tensor-json" if str(path).lower().endswith(".json") else "long-csv"


def load_tensor(path, format: str | None = None, time_unit: str = "step") -> SeriesTensor:
    path = Path(path)
    format = format or guess_format(path)
    if format == "long-csv":
        with open(path, newline="", encoding="utf-8") as fh:
            return read_long_csv(fh, time_unit=time_unit)
    if format == "tensor-json":
        with open(path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: invalid JSON ({exc})") from exc
        return tensor_from_json(doc)
    raise ParseError(f"unknown format {format!r}; expected one of {FORMATS}")


def read_long_csv(lines, time_unit: str = "step") -> SeriesTensor:
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty CSV input") from None
    if [h.strip() for h in header] != CSV_HEADER:
        raise ParseError(f"bad header {header!r}; expected {','.join(CSV_HEADER)}")

    entities: dict[str, int] = {}
    dims: dict[str, int] = {}
    cells: dict[tuple[int, int, int], float] = {}
    bad = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            bad.append(f"line {lineno}: expected 4 fields, got {len(row)}")
            continue
        ent, dim, t_raw, v_raw = (c.strip() for c in row)
        try:
            t = int(t_raw)
            v = float(v_raw)
        except ValueError:
            bad.append(f"line {lineno}: cannot parse t={t_raw!r} value={v_raw!r}")
            continue
        if t < 0:
            bad.append(f"line {lineno}: negative time index {t}")
            continue
        if not math.isfinite(v) or v < 0:
            bad.append(f"line {lineno}: value must be finite and >= 0, got {v_raw!r}")
            continue
        key = (entities.setdefault(ent, len(entities)), dims.setdefault(dim, len(dims)), t)
        if key in cells:
            bad.append(f"line {lineno}: duplicate cell ({ent}, {dim}, {t})")
            continue
        cells[key] = v
    if bad:
        raise ParseError("; ".join(bad[:20]) + (" ..." if len(bad) > 20 else ""))
    if not cells:
        raise ParseError("CSV contains no data rows")

    lengths: dict[int, int] = {}
    for e, _, t in cells:
        lengths[e] = max(lengths.get(e, 0), t + 1)
    if len(set(lengths.values())) > 1:
        names = {v: k for k, v in entities.items()}
        detail = ", ".join(f"{names[e]}:{n}" for e, n in sorted(lengths.items()))
        raise ShapeError(f"inconsistent series length across entities ({detail})")
    T = next(iter(lengths.values()))

    values = np.zeros((len(entities), len(dims), T))
    for (e, d, t), v in cells.items():
        values[e, d, t] = v
    return SeriesTensor(values, tuple(entities), tuple(dims), time_unit)


def tensor_from_json(doc) -> SeriesTensor:
    try:
        dims = [str(d) for d in doc["dimensions"]]
        ents = doc["entities"]
        ids = [str(e["id"]) for e in ents]
        rows = [e["series"] for e in ents]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"tensor-json missing field: {exc}") from exc
    if not ents:
        raise ParseError("tensor-json has no entities")
    shapes = set()
    for ent_id, series in zip(ids, rows):
        if not isinstance(series, list) or len(series) != len(dims):
            raise ShapeError(f"entity {ent_id}: expected {len(dims)} dimension rows")
        shapes.update(len(r) for r in series)
    if len(shapes) != 1:
        raise ShapeError(f"inconsistent series length across entities: {sorted(shapes)}")
    try:
        values = np.array(rows, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"non-numeric series value: {exc}") from exc
    return SeriesTensor(values, tuple(ids), tuple(dims), str(doc.get("time_unit", "step")))


def tensor_to_json(tensor: SeriesTensor) -> dict:
    return {
        "time_unit": tensor.time_unit,
        "dimensions": list(tensor.dimension_names),
        "entities": [
            {"id": eid, "series": tensor.values[i].tolist()}
            for i, eid in enumerate(tensor.entity_ids)
        ],
    }


def save_tensor(tensor: SeriesTensor, path, format: str | None = None) -> None:
    path = Path(path)
    format = format or guess_format(path)
    if format == "tensor-json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(tensor_to_json(tensor), fh)
            fh.write("\n")
    elif format == "long-csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for i, eid in enumerate(tensor.entity_ids):
                for d, dname in enumerate(tensor.dimension_names):
                    for t, v in enumerate(tensor.values[i, d]):
                        w.writerow([eid, dname, t, repr(float(v))])
    else:
        raise ParseError(f"unknown format {format!r}; expected one of {FORMATS}")
