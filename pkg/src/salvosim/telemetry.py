"""Telemetry and run-summary serialization.

CSV contract (version 1): UTF-8, LF line endings, 9 significant digits,
header ``time`` followed by eleven columns per agent i (1-based):

    x{i},y{i},heading{i},r{i},theta{i},delta{i},tgo{i},s{i},nu{i},accel{i},est_err{i}

Angle columns (heading, theta, delta) are written in degrees; everything
else is SI. Rows are decimated to the scenario's telemetry interval; the
final row is always included.

The companion summary is a JSON document that round-trips the RunResult.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .engine import AgentOutcome, RunResult, RunTelemetry, TELEMETRY_FIELDS

SUMMARY_SCHEMA_VERSION = 1

_ANGLE_FIELDS = {"heading", "theta", "delta"}


def telemetry_header(n: int) -> str:
    columns = ["time"]
    for i in range(1, n + 1):
        columns.extend(f"{name}{i}" for name in TELEMETRY_FIELDS)
    return ",".join(columns)


def _format(value: float) -> str:
    if math.isnan(value):
        return "nan"
    return f"{value:.9g}"


def write_telemetry_csv(
    telemetry: RunTelemetry, path, interval: float | None = None
) -> Path:
    """Write the decimated telemetry log; returns the written path."""
    path = Path(path)
    stride = 1
    if interval is not None and telemetry.dt > 0:
        stride = max(1, int(round(interval / telemetry.dt)))
    rows = telemetry.rows
    indices = list(range(0, rows, stride))
    if rows and indices and indices[-1] != rows - 1:
        indices.append(rows - 1)

    lines = [telemetry_header(telemetry.n)]
    data = telemetry.data
    for idx in indices:
        cells = [_format(telemetry.times[idx])]
        for i in range(telemetry.n):
            for name in TELEMETRY_FIELDS:
                value = data[name][idx, i]
                if name in _ANGLE_FIELDS:
                    value = math.degrees(value)
                cells.append(_format(value))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def result_to_dict(
    result: RunResult, *, scenario: str = "", seed: int | None = None, dt: float | None = None
) -> dict:
    return {
        "schema_version": SUMMARY_SCHEMA_VERSION,
        "scenario": scenario,
        "seed": seed,
        "dt": dt,
        "termination": result.termination,
        "consensus_time": result.consensus_time,
        "observer_settling_time": result.observer_settling_time,
        "salvo_spread": result.salvo_spread,
        "final_time": result.final_time,
        "agents": [
            {
                "agent": o.agent,
                "intercepted": o.intercepted,
                "time": o.time,
                "miss_distance": o.miss_distance,
            }
            for o in result.outcomes
        ],
    }


def result_from_dict(doc: dict) -> RunResult:
    outcomes = tuple(
        AgentOutcome(
            agent=entry["agent"],
            intercepted=entry["intercepted"],
            time=entry["time"],
            miss_distance=entry["miss_distance"],
        )
        for entry in doc["agents"]
    )
    return RunResult(
        termination=doc["termination"],
        outcomes=outcomes,
        consensus_time=doc["consensus_time"],
        observer_settling_time=doc["observer_settling_time"],
        salvo_spread=doc["salvo_spread"],
        final_time=doc["final_time"],
    )


def write_summary(result: RunResult, path, **meta) -> Path:
    path = Path(path)
    doc = result_to_dict(result, **meta)
    path.write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n"
    )
    return path


def read_summary(path) -> RunResult:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return result_from_dict(doc)
