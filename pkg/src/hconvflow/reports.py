"""Serialisation of traces, reports and summaries.

CSV numbers use 17 significant digits. JSON numbers use Python's shortest
round-trip repr, which reproduces every double exactly. Keys are sorted
so that identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math

import numpy as np

TRACE_HEADER = ["t", "L", "A", "LA", "Q", "M", "kmin", "kmax", "rmin", "rmax", "supdev"]


def _num(x):
    return f"{x:.17g}"


def write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_num(x) if isinstance(x, (float, np.floating)) else x for x in row])


def write_trace_csv(path, trace):
    rows = []
    for s in trace.samples:
        fn = s.functionals
        q = float("nan") if fn.hk_q is None else fn.hk_q
        rows.append([s.t, fn.length, fn.area, fn.la, q, fn.weighted_m, fn.kappa_min,
                     fn.kappa_max, fn.rho_min, fn.rho_max, s.sup_dev])
    write_rows(path, TRACE_HEADER, rows)


def to_jsonable(obj):
    """Convert dataclasses, numpy values and non-finite floats to plain JSON."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if hasattr(obj, "value"):
        return obj.value
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps(obj))
