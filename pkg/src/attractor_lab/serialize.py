"""Deterministic text output: CSV with 17 significant digits and JSON matrices."""

from __future__ import annotations

import io
import json
import math
import os
from pathlib import Path

import numpy as np

from .phasespace import CoefficientMatrix


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return header, data


def matrix_to_json(m) -> list:
    """Complex matrix as nested ``[re, im]`` pairs."""
    a = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("matrix JSON must be a nested list of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def json_text(obj) -> str:
    return json.dumps(_clean(obj), indent=1, sort_keys=True) + "\n"


def state_json(m: CoefficientMatrix | np.ndarray, **extra) -> str:
    mat = m.matrix if isinstance(m, CoefficientMatrix) else m
    tag = m.basis_tag if isinstance(m, CoefficientMatrix) else None
    return json_text({"basis_tag": tag, "matrix": matrix_to_json(mat), **extra})


def read_state_json(path) -> CoefficientMatrix:
    """Load a matrix written by :func:`state_json` or a snapshot file (first entry)."""
    with open(path) as fh:
        data = json.load(fh)
    if "snapshots" in data:
        data = data["snapshots"][0]
    return CoefficientMatrix(matrix_from_json(data["matrix"]), data.get("basis_tag") or "")


def emit_outputs(files: dict, out_dir) -> list[str]:
    """Write prepared ``{name: text}`` files into ``out_dir``.

    Everything is rendered before this is called, so a failing scenario leaves
    no partial output.  Each file goes through a temporary name and an atomic
    rename.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, content in files.items():
        target = out / name
        tmp = target.with_name(target.name + ".tmp")
        mode = "wb" if isinstance(content, bytes) else "w"
        with open(tmp, mode) as fh:
            fh.write(content)
        os.replace(tmp, target)
        written.append(str(target))
    return written
