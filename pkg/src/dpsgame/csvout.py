"""Deterministic CSV output with a commented metadata preamble."""
from __future__ import annotations

import csv
import io
from numbers import Integral, Real

import numpy as np


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, Integral):
        return str(int(v))
    if isinstance(v, Real):
        return "%.17g" % float(v)
    if isinstance(v, (np.ndarray, list, tuple)):
        return ";".join(format_value(x) for x in np.asarray(v).ravel().tolist())
    return str(v)


def render(columns, rows, metadata: dict) -> str:
    """CSV text: ``# key=value`` lines, then the header row, then data rows.

    Floats use 17 significant digits so they round-trip exactly; line endings
    are LF.
    """
    buf = io.StringIO()
    for k, v in metadata.items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([format_value(r.get(c)) for c in columns])
    return buf.getvalue()


def read(text: str) -> tuple[dict, list[dict]]:
    """Parse :func:`render` output back into metadata and string-valued rows."""
    meta, body = {}, []
    for line in text.splitlines(keepends=True):
        if line.startswith("# ") and not body:
            k, _, v = line[2:].rstrip("\n").partition("=")
            meta[k] = v
        else:
            body.append(line)
    return meta, list(csv.DictReader(body))
