"""Deterministic JSON/CSV serialisation and atomic file writes."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np


def _fmt_float(x: float, digits: int) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, f".{digits}g")
    return s


def to_json(obj, indent: int = 2) -> str:
    """JSON text with floats at 17 significant digits; non-finite floats become strings."""
    out = io.StringIO()

    def emit(o, level):
        pad = " " * (indent * level)
        inner = " " * (indent * (level + 1))
        if isinstance(o, (bool, np.bool_)):
            out.write("true" if o else "false")
        elif o is None:
            out.write("null")
        elif isinstance(o, (int, np.integer)):
            out.write(str(int(o)))
        elif isinstance(o, (float, np.floating)):
            x = float(o)
            out.write(_fmt_float(x, 17) if math.isfinite(x) else json.dumps(_fmt_float(x, 17)))
        elif isinstance(o, str):
            out.write(json.dumps(o, ensure_ascii=False))
        elif isinstance(o, dict):
            if not o:
                out.write("{}")
                return
            out.write("{\n")
            for i, (k, v) in enumerate(o.items()):
                out.write(f"{inner}{json.dumps(str(k), ensure_ascii=False)}: ")
                emit(v, level + 1)
                out.write(",\n" if i < len(o) - 1 else "\n")
            out.write(pad + "}")
        elif isinstance(o, (list, tuple, np.ndarray)):
            seq = list(o)
            if not seq:
                out.write("[]")
                return
            out.write("[\n")
            for i, v in enumerate(seq):
                out.write(inner)
                emit(v, level + 1)
                out.write(",\n" if i < len(seq) - 1 else "\n")
            out.write(pad + "]")
        else:
            out.write(json.dumps(str(o), ensure_ascii=False))

    emit(obj, 0)
    out.write("\n")
    return out.getvalue()


def csv_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v), 12)
    if v is None:
        return ""
    return str(v)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([csv_cell(v) for v in r])
    return buf.getvalue()


def atomic_write(path: str | os.PathLike, text: str) -> Path:
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path
