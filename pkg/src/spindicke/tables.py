"""Rectangular result tables with reproducibility metadata.

Floats are written with 17 significant digits so every value round-trips
bit-exactly; complex quantities are always split into re/im column pairs by
the producers.  CSV carries its metadata as '#'-prefixed header lines, the
line-delimited JSON format as a leading metadata object.  Identical inputs
yield byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

__all__ = ["ResultTable", "format_float", "emit", "read_table", "write_table"]


def format_float(x: float) -> str:
    return f"{x:.17g}"


@dataclass(frozen=True)
class ResultTable:
    columns: tuple
    rows: tuple                   # tuple of row tuples; cells float or str
    metadata: tuple = field(default=())   # ((key, value), ...) ordered

    def __post_init__(self):
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(
                    f"row length {len(r)} != column count {len(self.columns)}")


def _cell_str(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    return format_float(float(v))


def _to_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    for key, value in table.metadata:
        buf.write(f"# {key} = {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell_str(v) for v in row])
    return buf.getvalue()


def _to_jsonl(table: ResultTable) -> str:
    lines = [json.dumps({"metadata": dict(table.metadata),
                         "columns": list(table.columns)})]
    for row in table.rows:
        lines.append(json.dumps(dict(zip(table.columns, row))))
    return "\n".join(lines) + "\n"


def emit(table: ResultTable, format: str = "csv") -> str:
    """Serialize the table; format is "csv" or "jsonl"."""
    if format == "csv":
        return _to_csv(table)
    if format == "jsonl":
        return _to_jsonl(table)
    raise ValueError(f"unknown format {format!r}")


def _parse_cell(s: str):
    try:
        return float(s)
    except ValueError:
        return s


def read_table(text: str) -> ResultTable:
    """Parse the CSV wire format back into a ResultTable.

    Numeric cells come back as floats; emitting the parsed table again
    reproduces the original bytes.
    """
    metadata = []
    data_lines = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            metadata.append((key.strip(), value.strip()))
        elif line.strip() != "":
            data_lines.append(line)
    if not data_lines:
        raise ValueError("no header row found")
    reader = csv.reader(data_lines)
    rows = list(reader)
    columns = tuple(rows[0])
    parsed = tuple(tuple(_parse_cell(c) for c in r) for r in rows[1:])
    return ResultTable(columns, parsed, tuple(metadata))


def write_table(table: ResultTable, path, format: str = "csv") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(emit(table, format))
