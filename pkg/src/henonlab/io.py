"""CSV/JSON output. Floats go through repr so reruns are byte-identical."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .radial import RadialFunction, make_grid


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "value") and not isinstance(obj, (int, str)):
        return obj.value
    return obj


def dumps(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj))


def write_radial_csv(path, f, N=None):
    """``r,value`` rows plus a ``.json`` sidecar with the extension exponents."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "value"])
        for r, v in zip(f.grid.nodes, f.values):
            w.writerow([repr(float(r)), repr(float(v))])
    side = {"head_exp": f.head_exp, "tail_exp": f.tail_exp, "kelvin_symmetric": f.grid.kelvin_symmetric}
    if N is not None:
        side["N"] = N
    write_json(path.with_suffix(".json"), side)


def read_radial_csv(path):
    path = Path(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    side = json.loads(path.with_suffix(".json").read_text())
    r = data[:, 0]
    sym = side.get("kelvin_symmetric", False)
    grid = make_grid(None if sym else r[0], r[-1], len(r), kelvin_symmetric=sym)
    if not np.allclose(grid.nodes, r, rtol=1e-12, atol=0):
        raise ValueError(f"{path}: nodes do not form a log grid")
    return RadialFunction(grid, data[:, 1], side["head_exp"], side["tail_exp"])


TRACE_COLUMNS = ["kappa", "status", "iterations", "residual", "lambda_estimate"]


def write_trace_csv(path, rows):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for row in rows:
            w.writerow(["" if row[c] is None else (repr(float(row[c])) if isinstance(row[c], float) else row[c])
                        for c in TRACE_COLUMNS])
