"""Delimited and JSON output writers with reproducible formatting.

All writers format floats with repr-level precision and fixed column orders,
so identical inputs produce byte-identical files; manifests record sha256
checksums of every artifact for cheap reproducibility checks.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .dynamics import SimulationResult
from .experiments import ScanGrid
from .propagator import max_intermediate_population, train_transients
from .pulses import RabiSchedule

TRAJECTORY_COLUMNS = ("t", "p_g1", "p_e1", "p_g2", "p_e2", "p_g3", "norm")
SCHEDULE_COLUMNS = ("t", "omega1", "omega2", "omega3", "omega4", "omega_e1", "omega_e2")


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _write_rows(path: Path, header: str, rows, comments=()) -> Path:
    lines = [f"# {comment}" for comment in comments]
    lines.append(header)
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_schedule_csv(path, schedule: RabiSchedule, samples: int = 2000) -> Path:
    """Sampled pulse schedule: the four physical fields and two effective envelopes."""

    times = schedule.sample_times(samples)
    o1, o2, o3, o4 = schedule.physical(times)
    e1, e2 = schedule.effective(times)
    rows = zip(times, o1, o2, o3, o4, e1, e2)
    return _write_rows(Path(path), ",".join(SCHEDULE_COLUMNS), rows)


def write_trajectory_csv(path, result: SimulationResult) -> Path:
    """Five-state population trajectory with the running squared norm."""

    if result.dim != 5:
        raise ValueError("trajectory export expects a five-state result")
    rows = (
        (t, *pops, norm)
        for t, pops, norm in zip(result.times, result.populations, result.norms)
    )
    return _write_rows(Path(path), ",".join(TRAJECTORY_COLUMNS), rows)


def write_grid_csv(path, grid: ScanGrid) -> Path:
    """Scan grid in plot-ready long format, one row per cell."""

    comments = (
        f"axis1={grid.axis1_name} min={_fmt(grid.axis1_values.min())} "
        f"max={_fmt(grid.axis1_values.max())} points={len(grid.axis1_values)}",
        f"axis2={grid.axis2_name} min={_fmt(grid.axis2_values.min())} "
        f"max={_fmt(grid.axis2_values.max())} points={len(grid.axis2_values)}",
        f"observable={grid.observable}",
    )
    header = f"{grid.axis1_name},{grid.axis2_name},{grid.observable}"
    rows = (
        (a1, a2, grid.values[i, j])
        for i, a1 in enumerate(grid.axis1_values)
        for j, a2 in enumerate(grid.axis2_values)
    )
    return _write_rows(Path(path), header, rows, comments)


def write_grid_error_log(path, grid: ScanGrid) -> Path | None:
    """Sidecar log of failed grid cells; written only when failures exist."""

    if not grid.errors:
        return None
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        f"[{i},{j}] {grid.axis1_name}={_fmt(grid.axis1_values[i])} "
        f"{grid.axis2_name}={_fmt(grid.axis2_values[j])}: {message}"
        for i, j, message in grid.errors
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_n_scaling_csv(path, rows: np.ndarray) -> Path:
    header = "n_pairs,predicted_max_p_g2,measured_max_p_g2"
    return _write_rows(Path(path), header, rows)


def train_report(n_pairs: int, target_angle: float, area: float,
                 angles, initial=None) -> dict:
    """Analytic train summary: boundary states and per-step middle-state peaks."""

    states, curves, peaks = train_transients(angles, area, initial)
    steps = []
    for k, (phi, peak) in enumerate(zip(angles, peaks), start=1):
        steps.append({
            "index": k,
            "mixing_angle": float(phi),
            "entry_populations": [float(p) for p in np.abs(states[k - 1]) ** 2],
            "exit_populations": [float(p) for p in np.abs(states[k]) ** 2],
            "peak_middle_population": float(peak),
        })
    return {
        "n_pairs": int(n_pairs),
        "target_angle": float(target_angle),
        "area_per_step": float(area),
        "mixing_angles": [float(phi) for phi in angles],
        "final_populations": [float(p) for p in np.abs(states[-1]) ** 2],
        "predicted_peak_middle_population": max_intermediate_population(
            n_pairs, target_angle),
        "steps": steps,
    }


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


def sha256_of(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(path, command: str, config: dict, outputs, wall_time: float,
                   extra: dict | None = None) -> Path:
    """Run manifest: config echo, package version, checksums and wall time."""

    from . import __version__

    artifacts = {}
    for output in outputs:
        output = Path(output)
        artifacts[output.name] = {
            "sha256": sha256_of(output),
            "bytes": output.stat().st_size,
        }
    payload = {
        "command": command,
        "config": {k: (v if not isinstance(v, float) or math.isfinite(v) else str(v))
                   for k, v in config.items()},
        "version": __version__,
        "outputs": artifacts,
        "wall_time_s": wall_time,
    }
    if extra:
        payload.update(extra)
    return write_json(path, payload)
