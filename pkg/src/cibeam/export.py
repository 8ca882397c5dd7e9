"""File writers for reports, tables and grids.

Numbers are written with 17 significant digits in scientific notation so a
value read back is bit-identical to the one written. JSON keys are snake_case;
a quantity that is undefined (None) or infinite is written as null next to a
``<key>_note`` string explaining why.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from contextlib import contextmanager

import numpy as np

__all__ = [
    "fmt_float",
    "dumps_json",
    "write_text",
    "csv_text",
    "pgm_bytes",
    "atomic_output",
]


def fmt_float(x: float) -> str:
    return f"{float(x):.16e}"


def _plain(obj):
    """Turn complex numbers, numpy scalars and arrays into JSON-ready values."""
    if isinstance(obj, dict):
        out = {}
        for key, val in obj.items():
            val = _plain(val)
            if val is None or (isinstance(val, float) and not math.isfinite(val)):
                out.setdefault(f"{key}_note", "undefined" if val is None else "infinite")
                val = None
            out[key] = val
        return out
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _encode(val, indent, level):
    pad = " " * (indent * (level + 1))
    close = " " * (indent * level)
    if val is None:
        return "null"
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, int):
        return str(val)
    if isinstance(val, float):
        return fmt_float(val)
    if isinstance(val, str):
        return json.dumps(val)
    if isinstance(val, list):
        if all(not isinstance(v, (list, dict)) for v in val):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in val) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in val]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    if isinstance(val, dict):
        if not val:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in val.items()]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    raise TypeError(f"cannot serialize {type(val).__name__}")


def dumps_json(obj, indent: int = 2) -> str:
    """Serialize with fixed float formatting; the result parses with ``json.loads``.

    Notes are added for undefined or infinite values before the key itself.
    """
    return _encode(_plain(obj), indent, 0) + "\n"


def csv_text(header: dict, columns: list[str], rows) -> str:
    """CSV with ``# key=value`` header lines, one column line and LF endings."""
    lines = [f"# {k}={_header_value(v)}" for k, v in header.items()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def _header_value(v):
    v = _plain(v)
    if isinstance(v, float):
        return fmt_float(v)
    if isinstance(v, list):
        return ",".join(_header_value(x) for x in v)
    return str(v)


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    return fmt_float(v)


def pgm_bytes(values: np.ndarray, lo: float, hi: float) -> bytes:
    """Binary 16-bit PGM (P5, maxval 65535, big-endian), row 0 at the top.

    ``values`` are mapped linearly from ``[lo, hi]`` onto ``[0, 65535]``.
    """
    values = np.asarray(values, dtype=float)
    ny, nx = values.shape
    span = hi - lo
    scaled = (values - lo) / span if span > 0 else np.zeros_like(values)
    levels = np.clip(np.rint(scaled * 65535), 0, 65535).astype(">u2")
    return f"P5\n{nx} {ny}\n65535\n".encode("ascii") + levels.tobytes()


@contextmanager
def atomic_output(paths):
    """Yield temp paths that replace ``paths`` only if the block succeeds.

    On any error the temporaries are deleted, so no partial file is left.
    """
    temps = []
    try:
        for path in paths:
            folder = os.path.dirname(os.path.abspath(path))
            fd, tmp = tempfile.mkstemp(prefix=".cibeam-", dir=folder)
            os.close(fd)
            temps.append(tmp)
        yield temps
        for tmp, path in zip(temps, paths):
            os.replace(tmp, path)
        temps = []
    finally:
        for tmp in temps:
            if os.path.exists(tmp):
                os.remove(tmp)


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
