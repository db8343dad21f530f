"""CSV artifacts with ``#``-prefixed metadata headers.

Floats are written with ``repr`` so files round-trip exactly and identical
runs produce byte-identical output.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

__all__ = ["fmt", "write_csv", "read_csv", "header_lines", "write_sidecar"]


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "yes" if x else "no"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    if isinstance(x, (tuple, list)):
        return " ".join(fmt(v) for v in x)
    return str(x)


def header_lines(meta: Optional[Mapping]) -> list:
    if not meta:
        return []
    return [f"# {key} = {fmt(meta[key])}" for key in sorted(meta)]


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence], meta: Optional[Mapping] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for line in header_lines(meta):
            fh.write(line + "\n")
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(columns)
        for row in rows:
            wr.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> tuple:
    """Return ``(meta, columns, rows)``; numeric cells become floats."""
    meta, lines = {}, []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                meta[key.strip()] = value.strip()
            else:
                lines.append(line)
    reader = csv.reader(lines)
    columns = next(reader, [])
    rows = []
    for raw in reader:
        row = []
        for cell in raw:
            try:
                row.append(float(cell))
            except ValueError:
                row.append(cell)
        rows.append(row)
    return meta, columns, rows


def write_sidecar(path, data: Mapping) -> Path:
    """Non-reproducible run metadata (timings, host) kept out of the CSVs."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=str) + "\n")
    return path
