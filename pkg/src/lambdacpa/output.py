"""Deterministic table serialization (CSV and JSON)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.12g"


def format_value(value) -> str:
    """12 significant digits; NaN/None become empty fields."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return ""
        return FLOAT_FMT % value
    if isinstance(value, (complex, np.complexfloating)):
        return format_complex(value)
    return str(value)


def format_complex(z: complex) -> str:
    re, im = FLOAT_FMT % z.real, FLOAT_FMT % abs(z.imag)
    re = "0" if re == "-0" else re
    sign = "-" if z.imag < 0 and im != "0" else "+"
    return f"{re}{sign}{im}i"


def json_value(value):
    if value is None:
        return None
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return None if math.isnan(value) else float(FLOAT_FMT % value)
    if isinstance(value, (complex, np.complexfloating)):
        return format_complex(value)
    return value


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(values)

    @classmethod
    def from_columns(cls, **cols) -> "Table":
        names = list(cols)
        arrays = [np.asarray(v) for v in cols.values()]
        return cls(names, [tuple(a[i] for a in arrays) for i in range(len(arrays[0]))])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([format_value(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"columns": list(self.columns), "rows": [[json_value(v) for v in row] for row in self.rows]}


@dataclass
class Result:
    tables: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {"summary": {k: json_value(v) if not isinstance(v, (list, tuple)) else [json_value(x) for x in v]
                           for k, v in self.summary.items()},
               "tables": {k: t.to_json() for k, t in self.tables.items()}}
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def write_result(result: Result, fmt: str, out, stdout, name: str = "result") -> list:
    """Emit ``result``; returns the list of files written.

    With several tables and CSV output, ``out`` is a directory receiving one
    file per table. A single table goes to ``out`` (or stdout when unset).
    """
    written = []
    if fmt == "json":
        text = result.to_json()
        if out is None:
            stdout.write(text)
        else:
            path = Path(out)
            if path.suffix != ".json":
                path.mkdir(parents=True, exist_ok=True)
                path = path / f"{name}.json"
            else:
                path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
            written.append(path)
        return written
    if len(result.tables) == 1 and (out is None or Path(out).suffix == ".csv"):
        (table,) = result.tables.values()
        if out is None:
            stdout.write(table.to_csv())
        else:
            path = Path(out)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(table.to_csv())
            written.append(path)
        return written
    if out is None:
        for key, table in result.tables.items():
            stdout.write(f"# {key}\n")
            stdout.write(table.to_csv())
        return written
    folder = Path(out)
    folder.mkdir(parents=True, exist_ok=True)
    for key, table in result.tables.items():
        path = folder / f"{key}.csv"
        path.write_text(table.to_csv())
        written.append(path)
    return written
