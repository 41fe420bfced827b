"""CSV ingestion/emission and JSON helpers.

CSV layout: a header ``x1,...,xp[,y]`` followed by one row per observation.
Floats are written with ``repr`` so that every value round-trips exactly.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import Dataset, InvalidArgument


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file in the same directory and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v: float) -> str:
    return repr(float(v))


def dataset_to_csv(d: Dataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = [f"x{j + 1}" for j in range(d.p)]
    if d.y is not None:
        header.append("y")
    w.writerow(header)
    for i in range(d.n):
        row = [_fmt(v) for v in d.x[i]]
        if d.y is not None:
            row.append(_fmt(d.y[i]))
        w.writerow(row)
    return buf.getvalue()


def write_csv(d: Dataset, path) -> None:
    atomic_write_text(path, dataset_to_csv(d))


def read_csv(path, truth=None, meta=None) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InvalidArgument(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    has_y = bool(header) and header[-1] == "y"
    xcols = header[:-1] if has_y else header
    expected = [f"x{j + 1}" for j in range(len(xcols))]
    if not xcols or xcols != expected:
        raise InvalidArgument(f"{path}: header must be x1,...,xp[,y], got {','.join(header)}")
    body = [r for r in rows[1:] if r]
    if not body:
        raise InvalidArgument(f"{path}: no data rows")
    try:
        arr = np.array([[float(v) for v in r] for r in body], dtype=np.float64)
    except ValueError as exc:
        raise InvalidArgument(f"{path}: {exc}") from None
    if arr.ndim != 2 or arr.shape[1] != len(header):
        raise InvalidArgument(f"{path}: ragged rows (expected {len(header)} columns)")
    x = arr[:, : len(xcols)]
    y = arr[:, -1] if has_y else None
    return Dataset(x, y, truth, dict(meta or {}))


def dumps_json(obj) -> str:
    """Stable JSON: sorted keys, two-space indent, repr-exact floats."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(obj, path) -> None:
    atomic_write_text(path, dumps_json(obj))


def sidecar_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.name + ".json") if p.suffix != ".csv" else p.with_suffix(".json")


def read_dataset(csv_path) -> Dataset:
    """Read a CSV and, when present, its JSON sidecar (truth + metadata)."""
    side = sidecar_path(csv_path)
    truth, meta = None, {}
    if side.exists():
        with open(side, encoding="utf-8") as fh:
            info = json.load(fh)
        truth = info.get("truth")
        meta = info.get("meta", {})
    return read_csv(csv_path, truth=truth, meta=meta)
