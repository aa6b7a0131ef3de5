"""Result documents: JSON and CSV export with summary statistics.

Documents only contain simulated quantities, so the same run always
serialises to the same bytes.  Wall-clock time and memory are logged, not
stored.
"""

from __future__ import annotations

import csv
import io
import json
import math

from .engine import RunResult

SCHEMA_VERSION = 2
CSV_COLUMNS = ("request_index", "chain", "arrival_ns", "exe_time_ns")


def _r3(x: float) -> float:
    return round(float(x), 3)


def summarise(values: list[int]) -> dict:
    if not values:
        return {"count": 0, "mean_exe_time_ns": None, "median_exe_time_ns": None, "p95_exe_time_ns": None}
    s = sorted(values)
    n = len(s)
    median = s[n // 2] if n % 2 else (s[n // 2 - 1] + s[n // 2]) / 2
    p95 = s[max(0, math.ceil(0.95 * n) - 1)]  # nearest rank
    return {
        "count": n,
        "mean_exe_time_ns": _r3(sum(s) / n),
        "median_exe_time_ns": _r3(median),
        "p95_exe_time_ns": p95,
    }


def build_document(result: RunResult, *, max_drain_factor: float | None = None) -> dict:
    chains = sorted({r.chain for r in result.requests} | set(result.structure))
    config = {
        "weights": result.weights,
        "placement": result.placement,
        "chain_structure": result.structure,
    }
    if max_drain_factor is not None:
        config["max_drain_factor"] = max_drain_factor
    return {
        "schema_version": SCHEMA_VERSION,
        "scenario": result.scenario,
        "requests": [
            {"request_index": r.index, "chain": r.chain, "arrival_ns": r.arrival_ns, "exe_time_ns": r.exe_time_ns}
            for r in result.requests
        ],
        "aggregates": {c: summarise([r.exe_time_ns for r in result.requests if r.chain == c]) for c in chains},
        "engine": {
            "events_processed": result.events,
            "peak_live_threads": result.peak_live_threads,
            "threads_spawned": result.threads_spawned,
            "sim_end_ns": result.sim_end_ns,
        },
        "config": config,
    }


def to_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def export_csv(doc: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in doc["requests"]:
        writer.writerow([r[c] for c in CSV_COLUMNS])
    return buf.getvalue()
