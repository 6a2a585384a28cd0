"""Deterministic CSV/JSON report writing.

Floats are printed with 17 significant digits, JSON keys are sorted, and
every artifact carries a provenance record (command, parameters, version).
Files are written to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__


def fmt_float(v: float) -> str:
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    return format(v, ".17g")


def plain(obj):
    """Convert numpy scalars/arrays, tuples and Fractions into JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def dumps(obj, indent: int = 2) -> str:
    """Canonical JSON: sorted keys, 17-digit floats, trailing newline."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(k)}: {enc(o[k], level + 1)}" for k in sorted(o)]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list)) for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        if isinstance(o, bool) or o is None:
            return json.dumps(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return fmt_float(o)
        if isinstance(o, str):
            return json.dumps(o)
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(plain(obj), 0) + "\n"


def provenance(command: str, params: dict) -> dict:
    return {"command": command, "parameters": plain(params), "version": __version__}


def _cell(v) -> str:
    v = plain(v)
    if isinstance(v, float):
        return fmt_float(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    return str(v)


def csv_text(columns, rows, prov: dict | None = None) -> str:
    lines = []
    if prov is not None:
        lines.append("# " + json.dumps(plain(prov), sort_keys=True, separators=(",", ":")))
    lines.append(",".join(columns))
    for row in rows:
        if len(row) != len(columns):
            raise ValueError("row width does not match the header")
        lines.append(",".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def atomic_write(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_report(results: dict, fmt: str, path, command: str = "", params: dict | None = None) -> None:
    """Write ``results`` as JSON, or its table as CSV.

    For CSV, ``results`` must hold ``columns`` and ``rows``.
    """
    prov = provenance(command, params or {})
    if fmt == "json":
        body = dict(results)
        body["provenance"] = prov
        atomic_write(path, dumps(body))
    elif fmt == "csv":
        atomic_write(path, csv_text(results["columns"], results["rows"], prov))
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_csv_table(path) -> tuple[list[str], list[list[str]]]:
    """Read a CSV written by :func:`emit_report`, skipping the provenance line."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:] if ln]
