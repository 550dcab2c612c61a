"""Structured run output: trajectory CSV, event records, metric tables.

Every writer here is deterministic — no timestamps, no environment
queries — so a rerun with the same config and seed produces
byte-identical files.

The trajectory log converts the simulation's z-down coordinates into
human-facing altitude/climb columns (positive up).  The quaternion and
body angular rate are left in the internal z-down body frame; header
comments in the file say so.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

LOG_VERSION = "1"

# time + 13 state values (position 3, velocity 3, quaternion 4, angular
# rate 3) + 4 motor thrusts + contact force + grasper mode + phase.
RUN_LOG_COLUMNS = (
    "time_s",
    "x_m", "y_m", "altitude_m",
    "vx_ms", "vy_ms", "climb_rate_ms",
    "qw", "qx", "qy", "qz",
    "wx_rads", "wy_rads", "wz_rads",
    "motor1_n", "motor2_n", "motor3_n", "motor4_n",
    "contact_force_n",
    "grasper_mode", "mission_phase",
)

# Shared by the drop-test and collide subcommands: one row per trial
# plus a trailing 'mean' row over the numeric columns.
METRICS_COLUMNS = (
    "trial", "frame", "config", "pressure_kpa", "kind",
    "height_m", "impact_speed_ms", "contact_time_s", "peak_force_n",
    "peak_accel_ms2", "rebound_speed_ms", "restitution",
)

# beam-calib: one row per tabulated inflation pressure.
BEAM_COLUMNS = (
    "pressure_kpa", "modulus_pa", "bend_coeff_per_n",
    "tip_deflection_m", "tip_rotation_deg", "thrust_factor",
)


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float) and not math.isfinite(value):
        return "nan"
    return f"{value:.9g}"


# ---------------------------------------------------------------------------
# Trajectory log

def run_log_lines(rows, *, name: str, config_hash: str, seed: int) -> list:
    """Render trajectory rows (simrun.LogRow) to file lines."""
    lines = [
        f"# run log v{LOG_VERSION}",
        f"# scenario: {name}",
        f"# config_hash: {config_hash}",
        f"# seed: {seed}",
        "# frame convention: x_m/y_m horizontal; altitude_m and",
        "#   climb_rate_ms are positive up (converted from the internal",
        "#   z-down state); quaternion and angular rate remain in the",
        "#   internal z-down body frame.",
        ",".join(RUN_LOG_COLUMNS),
    ]
    for r in rows:
        values = (
            r.t,
            r.x[0], r.x[1], -r.x[2],
            r.v[0], r.v[1], -r.v[2],
            r.quat[0], r.quat[1], r.quat[2], r.quat[3],
            r.omega[0], r.omega[1], r.omega[2],
            r.thrusts[0], r.thrusts[1], r.thrusts[2], r.thrusts[3],
            r.contact_force,
            r.grasper_mode, r.mission_phase,
        )
        lines.append(",".join(_fmt(v) for v in values))
    return lines


def write_run_log(path, rows, *, name: str, config_hash: str, seed: int) -> None:
    text = "\n".join(run_log_lines(rows, name=name, config_hash=config_hash,
                                   seed=seed)) + "\n"
    Path(path).write_text(text)


def read_run_log(path):
    """Parse a trajectory log -> (meta dict, list of row dicts).

    Numeric columns come back as floats; the two trailing mode/phase
    columns stay strings.
    """
    meta: dict = {"comments": []}
    rows: list = []
    header: list | None = None
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("run log v"):
                meta["version"] = body[len("run log v"):]
            elif ":" in body:
                key, _, value = body.partition(":")
                if key.strip() in ("scenario", "config_hash", "seed"):
                    meta[key.strip()] = value.strip()
            meta["comments"].append(body)
            continue
        if header is None:
            header = line.split(",")
            continue
        parts = line.split(",")
        row = {}
        for col, text in zip(header, parts):
            if col in ("grasper_mode", "mission_phase"):
                row[col] = text
            else:
                row[col] = float(text)
        rows.append(row)
    meta["columns"] = tuple(header or ())
    if "seed" in meta:
        meta["seed"] = int(meta["seed"])
    return meta, rows


# ---------------------------------------------------------------------------
# Event records (one JSON object per line)

def event_lines(events) -> list:
    out = []
    for ev in events:
        out.append(json.dumps({
            "time_s": round(ev.timestamp, 9),
            "event": ev.kind.name,
            "phase_from": ev.phase_from.name,
            "phase_to": ev.phase_to.name,
        }, sort_keys=True))
    return out


def write_events(path, events) -> None:
    lines = event_lines(events)
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_events(path) -> list:
    return [json.loads(line)
            for line in Path(path).read_text().splitlines() if line.strip()]


# ---------------------------------------------------------------------------
# Metric tables (drop-test / collide / beam-calib)

def metrics_row(trial, frame: str, config: str, pressure_kpa, kind: str,
                height, metrics) -> dict:
    """One table row from an ImpactMetrics-like summary."""
    return {
        "trial": trial,
        "frame": frame,
        "config": config,
        "pressure_kpa": pressure_kpa,
        "kind": kind,
        "height_m": height,
        "impact_speed_ms": metrics.impact_speed,
        "contact_time_s": metrics.impact_time,
        "peak_force_n": metrics.peak_force,
        "peak_accel_ms2": metrics.peak_accel,
        "rebound_speed_ms": metrics.rebound_speed,
        "restitution": metrics.restitution,
    }


def mean_row(rows, columns=METRICS_COLUMNS) -> dict:
    """Arithmetic mean of every numeric column; identity columns keep a
    shared value if unanimous, else '-'."""
    out: dict = {}
    for col in columns:
        values = [r.get(col) for r in rows]
        numeric = [v for v in values if isinstance(v, (int, float))
                   and not isinstance(v, bool)]
        if numeric and len(numeric) == len(values):
            out[col] = sum(numeric) / len(numeric)
        else:
            distinct = set(values)
            out[col] = values[0] if len(distinct) == 1 else "-"
    out["trial"] = "mean"
    return out


def table_lines(rows, columns, comments=()) -> list:
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(columns))
    for r in rows:
        lines.append(",".join(_fmt(r.get(c)) for c in columns))
    return lines


def write_table(path, rows, columns, comments=()) -> None:
    Path(path).write_text("\n".join(table_lines(rows, columns, comments)) + "\n")


def read_table(path):
    """Parse a metric table -> (columns tuple, list of row dicts with
    numeric fields converted)."""
    header: list | None = None
    rows: list = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#") or not line.strip():
            continue
        if header is None:
            header = line.split(",")
            continue
        row = {}
        for col, text in zip(header, line.split(",")):
            try:
                row[col] = float(text)
            except ValueError:
                row[col] = text
        rows.append(row)
    return tuple(header or ()), rows


def format_table(rows, columns) -> str:
    """Fixed-width rendering of a metric table for standard output."""
    cells = [[_fmt(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(col), *(len(row[i]) for row in cells)) if cells
              else len(col) for i, col in enumerate(columns)]
    def line(parts):
        return "  ".join(p.ljust(w) for p, w in zip(parts, widths)).rstrip()
    out = [line(columns)]
    out.extend(line(row) for row in cells)
    return "\n".join(out)
