"""Grid and report serialisation.

Floats are written with ``repr`` (shortest round-trip form, at most 17
significant digits) so a written grid reads back bit-for-bit.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile

import numpy as np

CSV_HEADER = ("x", "V_n", "is_singular", "pole_kind")


def _fmt(value: float) -> str:
    return repr(float(value))


def atomic_write(path, text: str) -> None:
    """Write to a temp file in the target directory, then rename over it."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def grid_csv(sample) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for x, v, sing, kind in zip(sample.x, sample.v, sample.is_singular, sample.pole_kind):
        writer.writerow((_fmt(x), _fmt(v), int(bool(sing)), kind))
    return buf.getvalue()


def read_grid_csv(source) -> dict:
    """Inverse of :func:`grid_csv`; ``source`` is a path or an open file."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            return read_grid_csv(fh)
    reader = csv.reader(source)
    header = tuple(next(reader))
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header!r}")
    xs, vs, sing, kinds = [], [], [], []
    for row in reader:
        xs.append(float(row[0]))
        vs.append(float(row[1]))
        sing.append(row[2] == "1")
        kinds.append(row[3])
    return {
        "x": np.array(xs),
        "V_n": np.array(vs),
        "is_singular": np.array(sing, dtype=bool),
        "pole_kind": np.array(kinds),
    }


def _json_float(value):
    value = float(value)
    return value if math.isfinite(value) else None


def sidecar(sample, seeds, wells) -> dict:
    return {
        "seeds": [{"family": s.family.value, "kappa": s.kappa, "shift": s.shift} for s in seeds],
        "energies": [float(e) for e in sample.energies],
        "poles": [{"location": p.location, "kind": p.kind, "level": p.level} for p in sample.poles],
        "wells": [{"location": w.location, "depth": w.depth} for w in wells],
        "grid": {"x_min": float(sample.x[0]), "x_max": float(sample.x[-1]), "samples": int(sample.x.size)},
    }


def grid_json(sample, seeds, wells) -> str:
    doc = sidecar(sample, seeds, wells)
    doc["data"] = {
        "x": [float(x) for x in sample.x],
        "V_n": [_json_float(v) for v in sample.v],
        "is_singular": [bool(s) for s in sample.is_singular],
        "pole_kind": [str(k) for k in sample.pole_kind],
    }
    return json.dumps(doc, indent=1) + "\n"


def read_grid_json(source) -> dict:
    if isinstance(source, (str, os.PathLike)):
        with open(source) as fh:
            return read_grid_json(fh)
    doc = json.load(source)
    data = doc["data"]
    return {
        "x": np.array(data["x"], dtype=float),
        "V_n": np.array([np.nan if v is None else v for v in data["V_n"]], dtype=float),
        "is_singular": np.array(data["is_singular"], dtype=bool),
        "pole_kind": np.array(data["pole_kind"]),
        "meta": {k: v for k, v in doc.items() if k != "data"},
    }


def sidecar_path(path) -> str:
    root, _ = os.path.splitext(os.fspath(path))
    return root + ".meta.json"
