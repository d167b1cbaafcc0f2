"""Delimited-text and JSON-lines writers/readers for frame logs and result tables.

Frame log: one record per (frame, intended receiver) with columns
``variable, value, strategy, seed, fid, kind, src, dst, receiver, size,
enqueue_time, tx_start, time, outcome``. ``time`` is the end of the
transmission, when the outcome is decided. Channel times count from the
event instant. Each run opens with a ``kind=run`` marker record. Floats are written with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .metrics import RunMetrics, from_records
from .netsim import RSU

EVENT_COLUMNS = (
    "variable", "value", "strategy", "seed", "fid", "kind", "src", "dst", "receiver",
    "size", "enqueue_time", "tx_start", "time", "outcome",
)
RESULT_COLUMNS = (
    "variable", "value", "strategy", "rlr_mean", "rlr_std", "ard_mean", "ard_std",
    "seeds", "r_t", "r_r",
)


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def event_records(points):
    for pt in points:
        for run in pt.runs:
            # Marker row so runs without any frame survive a replay.
            yield {c: None for c in EVENT_COLUMNS} | {
                "variable": pt.variable, "value": pt.value, "strategy": run.strategy,
                "seed": run.seed, "kind": "run",
            }
            for f in run.frames:
                for rcv in f.receivers:
                    out = f.outcomes.get(rcv)
                    yield {
                        "variable": pt.variable, "value": pt.value, "strategy": run.strategy,
                        "seed": run.seed, "fid": f.fid, "kind": f.kind, "src": f.src,
                        "dst": f.dst, "receiver": rcv, "size": f.size,
                        "enqueue_time": f.enqueue_time, "tx_start": f.tx_start, "time": f.tx_end,
                        "outcome": None if out is None else out.value,
                    }


def _write(records, columns, fmt: str) -> str:
    buf = io.StringIO()
    if fmt == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for rec in records:
            w.writerow([_cell(rec[c]) for c in columns])
    elif fmt == "jsonl":
        for rec in records:
            buf.write(json.dumps({c: rec[c] for c in columns}) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return buf.getvalue()


def format_events(points, fmt: str = "csv") -> str:
    return _write(event_records(points), EVENT_COLUMNS, fmt)


def format_results(rows, fmt: str = "csv") -> str:
    recs = ({c: getattr(r, c) for c in RESULT_COLUMNS} for r in rows)
    return _write(recs, RESULT_COLUMNS, fmt)


def _sniff(path: Path, text: str) -> str:
    if path.suffix == ".jsonl" or text.lstrip().startswith("{"):
        return "jsonl"
    return "csv"


def read_events(path) -> list[dict]:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if _sniff(path, text) == "jsonl":
        return [json.loads(line) for line in text.splitlines() if line.strip()]
    reader = csv.DictReader(io.StringIO(text))
    missing = set(EVENT_COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"{path}: not a frame log (missing columns {sorted(missing)})")
    return list(reader)


def replay(path) -> dict:
    """Recompute per-run metrics from a frame log.

    Returns ``{(variable, value, strategy, seed): RunMetrics}`` in log order;
    ``value`` keeps the type it was read with.
    """
    runs: dict = {}
    for row in read_events(path):
        key = (str(row["variable"]), row["value"], str(row["strategy"]), int(row["seed"]))
        recs = runs.setdefault(key, [])
        if row["kind"] == "report" and str(row["receiver"]) == RSU:
            recs.append((row["outcome"], float(row["enqueue_time"]), float(row["time"])))
    return {k: from_records(v) for k, v in runs.items()}


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


__all__ = [
    "EVENT_COLUMNS", "RESULT_COLUMNS", "RunMetrics", "event_records", "format_events",
    "format_results", "read_events", "replay", "write_text",
]
