"""Delimited table formats: performance points, key-rate curves, capacity and
threshold tables.

Every writer embeds the fully resolved run configuration (JSON, one comment
line) so an output file is a reproducible record of its run. CSV files are
the wire format; JSON mirrors the same records. All writes go through a
temporary file and an atomic replace, so a failed run leaves no partial file.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass

from cvqkd_fec.keyrate import KeyRateModel, KeyRateResult
from cvqkd_fec.ldpc import PerformancePoint

__all__ = [
    "PERFORMANCE_COLUMNS",
    "KEYRATE_COLUMNS",
    "TableDocument",
    "keyrate_row",
    "performance_row",
    "read_table",
    "read_performance_table",
    "write_table",
]

PERFORMANCE_COLUMNS = ["rate", "snr", "wer", "ber", "undetected_wer", "beta", "trials", "seed"]
KEYRATE_COLUMNS = ["distance_km", "keyrate_raw", "keyrate_clamped", "model",
                   "code_rate", "snr", "wer", "beta", "v_a"]


@dataclass
class TableDocument:
    """One output table: column names, rows of scalars, and the run config."""

    columns: list[str]
    rows: list[list]
    config: dict

    def column(self, name: str) -> list:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]


def performance_row(point: PerformancePoint) -> list:
    return [point.rate, point.s, point.wer, point.ber, point.undetected_wer,
            point.beta_fec, point.trials, point.seed]


def keyrate_row(result: KeyRateResult) -> list:
    op = result.operating_point
    return [
        result.distance_km,
        result.raw,
        result.clamped,
        result.model.value,
        op.rate if op is not None else "",
        op.s if op is not None else "",
        op.wer if op is not None else "",
        op.beta_fec if op is not None else "",
        result.v_a if result.v_a is not None else "",
    ]


def _atomic_write(path: str, payload: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_table(path: str, doc: TableDocument, fmt: str = "csv") -> None:
    """Write a table as CSV (config in a leading # comment) or JSON."""
    if fmt == "csv":
        import io

        buf = io.StringIO()
        buf.write("# config: " + json.dumps(doc.config, sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(doc.columns)
        for row in doc.rows:
            writer.writerow(["" if v is None else v for v in row])
        _atomic_write(path, buf.getvalue())
    elif fmt == "json":
        records = [dict(zip(doc.columns, row)) for row in doc.rows]
        payload = json.dumps({"config": doc.config, "columns": doc.columns,
                              "rows": records}, indent=2, sort_keys=True)
        _atomic_write(path, payload + "\n")
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")


def _coerce(text: str):
    if text == "":
        return None
    try:
        value = float(text)
    except ValueError:
        return text
    if math.isfinite(value) and value == int(value) and ("." not in text and
                                                         "e" not in text.lower()):
        return int(value)
    return value


def read_table(path: str) -> TableDocument:
    """Read back either format written by write_table."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        raw = json.loads(text)
        rows = [[rec.get(c) for c in raw["columns"]] for rec in raw["rows"]]
        return TableDocument(columns=list(raw["columns"]), rows=rows,
                             config=raw.get("config", {}))
    config: dict = {}
    data_lines = []
    for line in text.splitlines():
        if line.startswith("# config:"):
            config = json.loads(line.split(":", 1)[1])
        elif not line.startswith("#") and line.strip():
            data_lines.append(line)
    if not data_lines:
        raise ValueError(f"{path}: no header row")
    reader = csv.reader(data_lines)
    columns = next(reader)
    rows = [[_coerce(cell) for cell in record] for record in reader]
    return TableDocument(columns=columns, rows=rows, config=config)


def read_performance_table(path: str) -> list[PerformancePoint]:
    """Parse a performance CSV/JSON back into PerformancePoint records."""
    doc = read_table(path)
    missing = [c for c in PERFORMANCE_COLUMNS if c not in doc.columns]
    if missing:
        raise ValueError(f"{path}: missing performance columns {missing}")
    points = []
    for row in doc.rows:
        rec = dict(zip(doc.columns, row))
        points.append(PerformancePoint(
            rate=float(rec["rate"]),
            s=float(rec["snr"]),
            wer=float(rec["wer"]),
            ber=float(rec["ber"]),
            undetected_wer=float(rec["undetected_wer"]),
            beta_fec=float(rec["beta"]),
            trials=int(rec["trials"]),
            seed=int(rec["seed"]),
        ))
    return points
