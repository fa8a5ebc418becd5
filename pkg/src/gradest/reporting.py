"""Deterministic output helpers.

Floats are rendered with Python's shortest round-trip representation and
files are written atomically (temp file in the target directory, then
rename), so identical inputs produce byte-identical artifacts.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

__all__ = ["fmt", "atomic_write_text", "write_json", "write_csv"]


def fmt(x) -> str:
    """Shortest round-trip text for a float; passthrough for other values."""
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, (int, str)):
        return str(x)
    return repr(x)


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_json(path, payload) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=False) + "\n")


def write_csv(path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(cell) for cell in row))
    atomic_write_text(path, "\n".join(lines) + "\n")
