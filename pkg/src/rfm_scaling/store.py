"""CSV persistence for sweep records and summaries, plus metadata sidecars.

Floats are serialized with repr (shortest round-trip decimal) and rows are
written with LF newlines, so output bytes are stable across runs and
platforms and records survive a write/read round trip exactly.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .sweep import SummaryRow, SweepRecord

RECORD_FIELDS = ["experiment", "rep", "n", "d", "sigma", "target", "model",
                 "split", "mse", "best_iter", "seed"]
SUMMARY_FIELDS = ["experiment", "d", "model", "split", "n_reps", "mean_mse",
                  "std_mse", "sem", "ci_lo", "ci_hi"]


def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def records_to_csv(records: list[SweepRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    for r in records:
        w.writerow([_fmt(getattr(r, f)) for f in RECORD_FIELDS])
    return buf.getvalue()


def write_records(path: Path | str, records: list[SweepRecord]) -> None:
    Path(path).write_text(records_to_csv(records), newline="")


def read_records(path: Path | str) -> list[SweepRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RECORD_FIELDS:
            raise ValueError(f"unexpected records header in {path}: {reader.fieldnames}")
        return [
            SweepRecord(
                experiment=row["experiment"], rep=int(row["rep"]), n=int(row["n"]),
                d=int(row["d"]), sigma=float(row["sigma"]), target=row["target"],
                model=row["model"], split=row["split"], mse=float(row["mse"]),
                best_iter=int(row["best_iter"]), seed=int(row["seed"]),
            )
            for row in reader
        ]


def summary_to_csv(rows: list[SummaryRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_FIELDS)
    for r in rows:
        w.writerow([_fmt(getattr(r, f)) for f in SUMMARY_FIELDS])
    return buf.getvalue()


def write_summary(path: Path | str, rows: list[SummaryRow]) -> None:
    Path(path).write_text(summary_to_csv(rows), newline="")


def read_summary(path: Path | str) -> list[SummaryRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SUMMARY_FIELDS:
            raise ValueError(f"unexpected summary header in {path}: {reader.fieldnames}")
        return [
            SummaryRow(
                experiment=row["experiment"], d=int(row["d"]), model=row["model"],
                split=row["split"], n_reps=int(row["n_reps"]),
                mean_mse=float(row["mean_mse"]), std_mse=float(row["std_mse"]),
                sem=float(row["sem"]), ci_lo=float(row["ci_lo"]),
                ci_hi=float(row["ci_hi"]),
            )
            for row in reader
        ]


def write_metadata(path: Path | str, data: dict) -> None:
    lines = [f"{key}={_fmt(value)}" for key, value in data.items()]
    Path(path).write_text("\n".join(lines) + "\n", newline="")


def read_metadata(path: Path | str) -> dict[str, str]:
    out: dict[str, str] = {}
    for line in Path(path).read_text().splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            out[key] = value
    return out
