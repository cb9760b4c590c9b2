"""Figure-level experiments: dynamics runs, detuning scans, and N-scaling.

Every experiment is a deterministic function of its configuration.  Scans
evaluate one full five-state integration per grid cell; cells are
independent, so they can be dispatched to a process pool, and results are
gathered by grid index so the output is identical for any worker count.
Failed cells (for example synthesis rejecting mixed-sign detunings) are
recorded as NaN together with the error message.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    DEFAULT_DT_FULL,
    DEFAULT_SAMPLES,
    IntegrationError,
    SimulationResult,
    integrate_five_state,
    warm_up,
)
from .propagator import max_intermediate_population
from .pulses import (
    DEFAULT_AREA,
    FULL_TRANSFER_ANGLE,
    SynthesisError,
    build_schedule,
)
from .states import DecayConfig, DetuningConfig, G2, G3, NO_DECAY

DEFAULT_DETUNING = 300.0
DEFAULT_ONE_PHOTON_RANGE = (100.0, 600.0)
DEFAULT_TWO_PHOTON_RANGE = (-1.0, 1.0)
DEFAULT_GRID_POINTS = 41
OBSERVABLE_FINAL_G3 = "final_p_g3"


@dataclass
class ScanGrid:
    """Dense observable values over a two-parameter grid."""

    axis1_name: str
    axis1_values: np.ndarray
    axis2_name: str
    axis2_values: np.ndarray
    observable: str
    values: np.ndarray  # shape (len(axis1), len(axis2)); NaN marks failed cells
    errors: tuple = field(default_factory=tuple)  # (i, j, message) per failure

    def __post_init__(self):
        expected = (len(self.axis1_values), len(self.axis2_values))
        if self.values.shape != expected:
            raise ValueError(f"values shape {self.values.shape} != grid shape {expected}")


def grid_axis(lo: float, hi: float, points: int) -> np.ndarray:
    if points < 2:
        raise ValueError("a scan axis needs at least 2 points")
    return np.linspace(lo, hi, points)


def run_dynamics_experiment(n_pairs: int = 5, det: DetuningConfig | None = None,
                            decay: DecayConfig = NO_DECAY,
                            target_angle: float = FULL_TRANSFER_ANGLE,
                            width: float = 1.0, spacing: float | None = None,
                            area: float = DEFAULT_AREA, dt: float = DEFAULT_DT_FULL,
                            samples: int = DEFAULT_SAMPLES,
                            _profiles=None) -> SimulationResult:
    """Synthesize a train and propagate the full five-state system from g1."""

    if det is None:
        det = DetuningConfig(DEFAULT_DETUNING, DEFAULT_DETUNING)
    schedule = build_schedule(n_pairs, det, target_angle=target_angle,
                              width=width, spacing=spacing, area=area)
    return integrate_five_state(schedule, decay=decay, dt=dt, samples=samples,
                                profiles=_profiles)


# ----------------------------------------------------------------------
# Scan engine
# ----------------------------------------------------------------------

_PAYLOAD = None


def _init_worker(payload):
    global _PAYLOAD
    _PAYLOAD = payload


def _eval_point(task):
    """Evaluate one grid cell; returns (i, j, value, error message or None)."""

    i, j, x1, x2 = task
    p = _PAYLOAD
    try:
        if p["mode"] == "one_photon":
            det = DetuningConfig(x1, x2, p["base_det"].small_delta1,
                                 p["base_det"].small_delta2)
        else:
            base = p["base_det"]
            det = DetuningConfig(base.delta1, base.delta2, x1, x2)
        result = run_dynamics_experiment(
            n_pairs=p["n_pairs"], det=det, decay=p["decay"],
            target_angle=p["target_angle"], width=p["width"],
            spacing=p["spacing"], area=p["area"], dt=p["dt"],
            samples=p["samples"], _profiles=p["profiles"],
        )
        return i, j, float(result.final_populations[G3]), None
    except (SynthesisError, IntegrationError, ValueError) as exc:
        return i, j, float("nan"), f"{type(exc).__name__}: {exc}"


def _run_grid(mode, axis1, axis2, payload, workers):
    tasks = [
        (i, j, float(a1), float(a2))
        for i, a1 in enumerate(axis1)
        for j, a2 in enumerate(axis2)
    ]
    values = np.full((len(axis1), len(axis2)), np.nan)
    errors = []
    payload = dict(payload, mode=mode)
    if workers is not None and workers > 1:
        warm_up()  # compile kernels once before the pool forks
        chunk = max(1, len(tasks) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(payload,)) as pool:
            results = list(pool.map(_eval_point, tasks, chunksize=chunk))
    else:
        _init_worker(payload)
        results = [_eval_point(task) for task in tasks]
    for i, j, value, err in results:
        values[i, j] = value
        if err is not None:
            errors.append((i, j, err))
    return values, tuple(errors)


def _shared_profiles(payload):
    """Pulse profiles at the integration substage times, shared by all cells.

    The profiles depend only on the train geometry, so a probe schedule with
    placeholder detunings samples them once for every grid cell.
    """

    from .dynamics import _grid  # local import to keep the helper private

    probe_det = DetuningConfig(DEFAULT_DETUNING, DEFAULT_DETUNING)
    probe = build_schedule(payload["n_pairs"], probe_det,
                           target_angle=payload["target_angle"],
                           width=payload["width"], spacing=payload["spacing"],
                           area=payload["area"])
    _, _, _, _, sub_times = _grid(probe.window, payload["dt"], payload["samples"])
    return probe.stretched_profiles(sub_times)


def scan_one_photon(delta1_values, delta2_values, n_pairs: int = 5,
                    decay: DecayConfig = NO_DECAY, dt: float = DEFAULT_DT_FULL,
                    target_angle: float = FULL_TRANSFER_ANGLE, width: float = 1.0,
                    spacing: float | None = None, area: float = DEFAULT_AREA,
                    samples: int = DEFAULT_SAMPLES,
                    workers: int | None = None) -> ScanGrid:
    """Final g3 population over a grid of one-photon detunings.

    The detuning ratio is recomputed per cell from the axis values; zero
    detunings are rejected up front since no pulse amplitudes exist there.
    """

    delta1_values = np.asarray(delta1_values, dtype=float)
    delta2_values = np.asarray(delta2_values, dtype=float)
    if np.any(delta1_values == 0.0) or np.any(delta2_values == 0.0):
        raise ValueError("one-photon detuning grids must exclude zero")
    payload = {
        "n_pairs": n_pairs, "decay": decay, "dt": dt, "target_angle": target_angle,
        "width": width, "spacing": spacing, "area": area, "samples": samples,
        "base_det": DetuningConfig(float(delta1_values[0]), float(delta2_values[0])),
    }
    payload["profiles"] = _shared_profiles(payload)
    values, errors = _run_grid("one_photon", delta1_values, delta2_values,
                               payload, workers)
    return ScanGrid("delta1", delta1_values, "delta2", delta2_values,
                    OBSERVABLE_FINAL_G3, values, errors)


def scan_two_photon(small_delta1_values, small_delta2_values,
                    det: DetuningConfig | None = None, n_pairs: int = 5,
                    dt: float = DEFAULT_DT_FULL,
                    target_angle: float = FULL_TRANSFER_ANGLE, width: float = 1.0,
                    spacing: float | None = None, area: float = DEFAULT_AREA,
                    samples: int = DEFAULT_SAMPLES, decay: DecayConfig = NO_DECAY,
                    workers: int | None = None) -> ScanGrid:
    """Final g3 population over a grid of two-photon detunings at fixed delta1/delta2."""

    if det is None:
        det = DetuningConfig(DEFAULT_DETUNING, DEFAULT_DETUNING)
    small_delta1_values = np.asarray(small_delta1_values, dtype=float)
    small_delta2_values = np.asarray(small_delta2_values, dtype=float)
    payload = {
        "n_pairs": n_pairs, "decay": decay, "dt": dt, "target_angle": target_angle,
        "width": width, "spacing": spacing, "area": area, "samples": samples,
        "base_det": det,
    }
    payload["profiles"] = _shared_profiles(payload)
    values, errors = _run_grid("two_photon", small_delta1_values,
                               small_delta2_values, payload, workers)
    return ScanGrid("small_delta1", small_delta1_values, "small_delta2",
                    small_delta2_values, OBSERVABLE_FINAL_G3, values, errors)


def sign_flip_asymmetry(grid: ScanGrid) -> float:
    """Largest |value(x, y) - value(-x, -y)| over the grid, ignoring NaNs.

    Meaningful for sign-symmetric axes (two-photon scans); reported as a
    diagnostic rather than asserted, since the symmetry is only approximate.
    """

    flipped = grid.values[::-1, ::-1]
    diff = np.abs(grid.values - flipped)
    return float(np.nanmax(diff)) if np.any(np.isfinite(diff)) else float("nan")


def n_scaling(max_pairs: int, target_angle: float = FULL_TRANSFER_ANGLE,
              det: DetuningConfig | None = None, dt: float = DEFAULT_DT_FULL,
              width: float = 1.0, spacing: float | None = None,
              area: float = DEFAULT_AREA) -> np.ndarray:
    """Predicted vs measured middle-state transient maximum for N = 1..max_pairs.

    Returns rows (N, sin^2(target_angle/N), measured max g2 population in the
    full five-state run); the measured column tracks the 1/N^2 suppression.
    """

    if max_pairs < 1:
        raise ValueError("max_pairs must be >= 1")
    if det is None:
        det = DetuningConfig(DEFAULT_DETUNING, DEFAULT_DETUNING)
    rows = np.empty((max_pairs, 3))
    for n in range(1, max_pairs + 1):
        result = run_dynamics_experiment(n_pairs=n, det=det, target_angle=target_angle,
                                         width=width, spacing=spacing, area=area, dt=dt)
        rows[n - 1] = (n, max_intermediate_population(n, target_angle),
                       result.max_transients[G2])
    return rows


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)
