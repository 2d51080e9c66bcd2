"""Deterministic file artifacts: CSV tables, PGM images, JSON metadata.

All writers are atomic (write-then-rename) and locale independent; numbers
are formatted with 9 significant digits so that identical inputs always
produce byte-identical files.
"""
from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np


def format_value(value) -> str:
    """Locale-independent cell formatting; NaN/None become empty cells."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    x = float(value)
    if math.isnan(x):
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.9g}"


def _atomic_write(path: Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.parent / f".{path.name}.tmp"
    with open(tmp, "wb") as handle:
        handle.write(data)
    os.replace(tmp, path)


def write_csv(path, header, rows) -> None:
    """CSV with a header row; cells formatted by format_value."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(cell) for cell in row))
    _atomic_write(Path(path), ("\n".join(lines) + "\n").encode("ascii"))


def write_json(path, obj) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    _atomic_write(Path(path), text.encode("utf-8"))


def write_csv_grid(path, values: np.ndarray) -> None:
    """2-D array as a plain numeric CSV grid (no header)."""
    values = np.asarray(values)
    if values.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {values.shape}")
    lines = [",".join(format_value(v) for v in row) for row in values]
    _atomic_write(Path(path), ("\n".join(lines) + "\n").encode("ascii"))


def write_pgm(path, values: np.ndarray) -> None:
    """Grayscale 16-bit binary PGM, normalized to the array maximum.

    Rows of the image are the second array axis (y), top row = highest y,
    so the image matches a conventional x-right / y-up plot of the field.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {values.shape}")
    vmax = float(values.max())
    if vmax <= 0.0:
        scaled = np.zeros_like(values, dtype=np.uint16)
    else:
        scaled = np.clip(values / vmax * 65535.0, 0.0, 65535.0).astype(np.uint16)
    image = scaled.T[::-1]
    header = f"P5\n{image.shape[1]} {image.shape[0]}\n65535\n".encode("ascii")
    _atomic_write(Path(path), header + image.astype(">u2").tobytes())
