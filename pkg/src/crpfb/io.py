"""File formats: complex series CSV, numeric CSV tables and JSON documents.

All numbers are written with ``%.17g`` (CSV) or ``repr`` (JSON), both of
which round-trip float64 exactly and ignore the process locale.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .signalgen import ComplexSeries

SERIES_HEADER = ("l", "t", "re", "im")


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_table(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"row has {len(row)} fields, header has {len(header)}")
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def read_table(path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    return rows[0], rows[1:]


def write_series(path, series: ComplexSeries) -> Path:
    t = series.times
    z = series.samples
    rows = ((l, t[l], z[l].real, z[l].imag) for l in range(z.size))
    return write_table(path, SERIES_HEADER, rows)


def read_series(path) -> ComplexSeries:
    header, rows = read_table(path)
    if tuple(h.strip() for h in header) != SERIES_HEADER:
        raise ValueError(f"{path}: expected header {','.join(SERIES_HEADER)}")
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two samples")
    arr = np.array([[float(x) for x in r[1:]] for r in rows])
    idx = [int(r[0]) for r in rows]
    if idx != list(range(len(rows))):
        raise ValueError(f"{path}: sample index must run 0..n-1")
    t = arr[:, 0]
    dt = (t[-1] - t[0]) / (len(t) - 1)
    return ComplexSeries(float(t[0]), float(dt), arr[:, 1] + 1j * arr[:, 2])


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        # JSON has no inf/nan literals; keep them readable and reversible
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=2) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def sha256(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()
