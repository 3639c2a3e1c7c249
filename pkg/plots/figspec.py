"""Figure specifications and CSV/JSON input readers for the plotting scripts.

The readers validate the documented schemas up front and fail fast with a
SchemaError on missing or malformed columns; rendering never mutates its
inputs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

KINDS = ("timeseries", "histogram", "returnmap", "manifold3d", "chi", "prefactors")


class SchemaError(ValueError):
    """Input file does not match the documented schema."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple
    output: Path
    title: str = ""
    xlim: tuple | None = None
    ylim: tuple | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not self.inputs:
            raise SchemaError("at least one input file is required")


def read_csv_columns(path, required: tuple) -> dict:
    """Load a CSV into float columns, insisting on the required header names."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"input file {path} does not exist")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}; header is {header}")
        idx = {c: header.index(c) for c in header}
        cols: dict = {c: [] for c in header}
        for row_num, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise SchemaError(f"{path}:{row_num}: expected {len(header)} fields, "
                                  f"got {len(row)}")
            for c in header:
                value = row[idx[c]]
                try:
                    cols[c].append(float(value))
                except ValueError:
                    cols[c].append(value)
    return cols
