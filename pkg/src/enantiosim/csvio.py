"""Bit-stable CSV and manifest emission.

Numbers are written with 12 significant digits and a '.' decimal separator;
files are written to a temporary name and atomically renamed, with a fixed
newline so output is byte-identical across platforms for identical inputs.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Mapping, Sequence


def format_number(value) -> str:
    if isinstance(value, str):
        return value
    return f"{float(value):.12g}"


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header: Sequence[str], columns: Mapping[str, Sequence]):
    """Write named columns as CSV in the given header order."""
    missing = [name for name in header if name not in columns]
    if missing:
        raise KeyError(f"missing column(s) {missing}")
    lengths = {len(columns[name]) for name in header}
    if len(lengths) > 1:
        raise ValueError("columns must share one length")
    (n_rows,) = lengths
    lines = [",".join(header)]
    for k in range(n_rows):
        lines.append(",".join(format_number(columns[name][k]) for name in header))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_manifest(path: str, manifest: dict):
    _atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n")


def read_manifest(path: str) -> dict:
    with open(path) as handle:
        return json.load(handle)


def _json_default(obj):
    import numpy as np

    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")
