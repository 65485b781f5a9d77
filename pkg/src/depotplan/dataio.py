"""CSV ingestion, synthetic data generation, and output serialization.

All artifacts are plain CSV/JSON with reals fixed to six decimal places, so
reruns with identical inputs and flags produce byte-identical files.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from .core import ConfigError, DataError, Phase, WaypointSet, DepotSet

CSV_HEADER = ["id", "lon", "lat"]
DECIMALS = 6

WORLD_LON = (-180.0, 180.0)
WORLD_LAT = (-85.0, 85.0)


@dataclass(frozen=True)
class OutputBundle:
    depots_path: str
    assignment_path: str
    summary_path: str
    plot_path: str
    metrics_path: str = None


def ingest_csv(path) -> WaypointSet:
    """Read a waypoint file with header id,lon,lat.

    Duplicate coordinates are fine (real point-of-sale data has them);
    duplicate ids, unparseable numbers, and non-finite values are not.
    """
    path = os.fspath(path)
    if not os.path.exists(path):
        raise DataError(f"input file not found: {path}")
    ids, xs, ys = [], [], []
    seen = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != CSV_HEADER:
            raise DataError(f"{path}:1: expected header 'id,lon,lat', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            wid = row[0].strip()
            if not wid:
                raise DataError(f"{path}:{lineno}: empty waypoint id")
            if wid in seen:
                raise DataError(f"{path}:{lineno}: duplicate waypoint id {wid!r}")
            try:
                lon, lat = float(row[1]), float(row[2])
            except ValueError:
                raise DataError(f"{path}:{lineno}: unparseable coordinate in {row[1:]!r}")
            if not (math.isfinite(lon) and math.isfinite(lat)):
                raise DataError(f"{path}:{lineno}: non-finite coordinate for id {wid!r}")
            seen.add(wid)
            ids.append(wid)
            xs.append(lon)
            ys.append(lat)
    coords = np.column_stack([xs, ys]) if ids else np.empty((0, 2))
    return WaypointSet(coords, tuple(ids), np.full(len(ids), int(Phase.ONE), dtype=np.int8))


def generate_synthetic(n: int, clusters: int, spread: float, seed: int) -> WaypointSet:
    """Gaussian blobs around uniformly random world-scale centers.

    Blob centers are drawn in [-180, 180] x [-85, 85]; each blob gets an
    equal share of the n points (first blobs absorb any remainder) with the
    given standard deviation. Fully determined by the seed.
    """
    if clusters < 1 or n < clusters:
        raise ConfigError(f"need n >= clusters >= 1, got n={n}, clusters={clusters}")
    if not (spread > 0.0):
        raise ConfigError(f"spread must be positive, got {spread}")
    rng = np.random.default_rng(seed)
    centers = np.column_stack([
        rng.uniform(WORLD_LON[0], WORLD_LON[1], clusters),
        rng.uniform(WORLD_LAT[0], WORLD_LAT[1], clusters),
    ])
    base, extra = divmod(n, clusters)
    counts = np.full(clusters, base)
    counts[:extra] += 1
    coords = np.repeat(centers, counts, axis=0) + rng.normal(0.0, spread, (n, 2))
    ids = tuple(f"p{i:06d}" for i in range(n))
    return WaypointSet(coords, ids, np.full(n, int(Phase.ONE), dtype=np.int8))


def _f(x: float) -> str:
    return f"{x:.{DECIMALS}f}"


def write_waypoints_csv(waypoints: WaypointSet, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for wid, (x, y) in zip(waypoints.ids, waypoints.coords):
            writer.writerow([wid, _f(x), _f(y)])


def write_depots_csv(depots: DepotSet, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["depot_id", "lon", "lat"])
        for j, (x, y) in enumerate(depots.coords):
            writer.writerow([j, _f(x), _f(y)])


def read_depots_csv(path) -> DepotSet:
    path = os.fspath(path)
    if not os.path.exists(path):
        raise DataError(f"depots file not found: {path}")
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["depot_id", "lon", "lat"]:
            raise DataError(f"{path}:1: expected header 'depot_id,lon,lat', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append((int(row[0]), float(row[1]), float(row[2])))
            except (ValueError, IndexError):
                raise DataError(f"{path}:{lineno}: unparseable depot row {row!r}")
    if not rows:
        raise DataError(f"{path}: no depots")
    rows.sort()
    if [r[0] for r in rows] != list(range(len(rows))):
        raise DataError(f"{path}: depot_id column must be 0..{len(rows) - 1}")
    return DepotSet(np.array([[x, y] for _, x, y in rows]))


def write_assignment_csv(path, waypoints, depots, plan, exponent) -> None:
    target = depots.coords[plan.assigned_depot]
    dist = np.hypot(waypoints.coords[:, 0] - target[:, 0],
                    waypoints.coords[:, 1] - target[:, 1])
    cost = dist * dist if exponent == 2 else dist
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["waypoint_id", "depot_id", "phase", "distance", "cost"])
        for i, wid in enumerate(waypoints.ids):
            writer.writerow([wid, int(plan.assigned_depot[i]),
                             int(waypoints.phases[i]), _f(dist[i]), _f(cost[i])])


def write_plot_csv(path, waypoints, plan) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lon", "lat", "depot_id"])
        for i, (x, y) in enumerate(waypoints.coords):
            writer.writerow([_f(x), _f(y), int(plan.assigned_depot[i])])


def _json_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _f(float(value))
    return f'"{value}"'


def _write_json(path, pairs) -> None:
    body = ",\n".join(f'  "{k}": {_json_value(v)}' for k, v in pairs)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("{\n" + body + "\n}\n")


def write_outputs(result, out_dir, scrub_timing: bool = True) -> OutputBundle:
    """Serialize a pipeline result into its output directory.

    Writes depots.csv, assignment.csv (over the union set), summary.json and
    plot.csv. Wall-clock fields in summary.json are zeroed by default so the
    bundle is byte-reproducible; actual timings live in result.timing_ms.
    """
    os.makedirs(out_dir, exist_ok=True)
    depots_path = os.path.join(out_dir, "depots.csv")
    assignment_path = os.path.join(out_dir, "assignment.csv")
    summary_path = os.path.join(out_dir, "summary.json")
    plot_path = os.path.join(out_dir, "plot.csv")

    write_depots_csv(result.depots, depots_path)
    write_assignment_csv(assignment_path, result.waypoints, result.depots,
                          result.plan_phase2, result.config.cost_exponent)
    write_plot_csv(plot_path, result.waypoints, result.plan_phase2)

    m = result.metrics
    timing1 = 0 if scrub_timing else int(round(result.timing_ms.get("phase1", 0.0)))
    timing2 = 0 if scrub_timing else int(round(result.timing_ms.get("phase2", 0.0)))
    _write_json(summary_path, [
        ("k", result.config.k),
        ("gamma", float(result.config.gamma)),
        ("seed", result.config.seed),
        ("n_phase1", m.n_phase1),
        ("n_phase2", m.n_phase2),
        ("objective_phase1", m.objective_phase1),
        ("objective_phase2", m.objective_phase2),
        ("mse_phase1", m.mse_phase1),
        ("mse_phase2", m.mse_phase2),
        ("pct_change", m.pct_change),
        ("iterations_phase1", result.iterations_phase1),
        ("runtime_ms_phase1", timing1),
        ("runtime_ms_phase2", timing2),
    ])
    return OutputBundle(depots_path, assignment_path, summary_path, plot_path)


def write_metrics_csv(entries, path) -> None:
    """Sweep table with one row per successful k (matching the report shape)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "mse_phase1", "mse_phase2", "pct_change"])
        for entry in entries:
            if entry.report is None:
                continue
            r = entry.report
            writer.writerow([entry.k, _f(r.mse_phase1), _f(r.mse_phase2), _f(r.pct_change)])
