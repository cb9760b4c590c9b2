"""Figure rendering for schedules, trajectories, scan grids and N-scaling.

Uses the non-interactive Agg backend so the CLI can drop PNGs next to its
delimited output on headless machines.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .dynamics import SimulationResult
from .experiments import ScanGrid
from .pulses import RabiSchedule
from .states import BASIS_FULL

_POPULATION_LABELS = [f"$P_{{{name[0]}_{name[1]}}}$" for name in BASIS_FULL]
_FIELD_LABELS = [rf"$\Omega_{i}$" for i in range(1, 5)]


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_schedule(schedule: RabiSchedule, path, samples: int = 2000) -> Path:
    """Physical fields (top) and effective envelopes (bottom) over the window."""

    times = schedule.sample_times(samples)
    physical = schedule.physical(times)
    effective = schedule.effective(times)

    fig, axes = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    for values, label in zip(physical, _FIELD_LABELS):
        axes[0].plot(times, values, label=label)
    axes[0].set_ylabel("Rabi frequency (1/T)")
    axes[0].legend(ncol=4, fontsize="small")
    axes[0].grid(True, alpha=0.3)

    axes[1].plot(times, effective[0], label=r"$\Omega_{e1}$")
    axes[1].plot(times, effective[1], label=r"$\Omega_{e2}$")
    axes[1].set_xlabel("t (T)")
    axes[1].set_ylabel("effective coupling (1/T)")
    axes[1].legend(fontsize="small")
    axes[1].grid(True, alpha=0.3)
    return _save(fig, path)


def plot_trajectory(result: SimulationResult, path,
                    schedule: RabiSchedule | None = None) -> Path:
    """Populations vs time, optionally with the driving fields on a top panel."""

    if schedule is not None:
        fig, (ax_top, ax) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
        for values, label in zip(schedule.physical(result.times), _FIELD_LABELS):
            ax_top.plot(result.times, values, label=label)
        ax_top.set_ylabel("Rabi frequency (1/T)")
        ax_top.legend(ncol=4, fontsize="small")
        ax_top.grid(True, alpha=0.3)
    else:
        fig, ax = plt.subplots(figsize=(8, 4))

    labels = _POPULATION_LABELS if result.dim == 5 else ["$P_{g_1}$", "$P_{g_2}$", "$P_{g_3}$"]
    for i in range(result.dim):
        ax.plot(result.times, result.populations[:, i], label=labels[i])
    ax.plot(result.times, result.norms, "k--", lw=0.8, label="norm")
    ax.set_xlabel("t (T)")
    ax.set_ylabel("population")
    ax.set_ylim(-0.02, 1.05)
    ax.legend(ncol=3, fontsize="small")
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def plot_grid(grid: ScanGrid, path) -> Path:
    """Filled contour map of a scan grid; failed cells are masked."""

    fig, ax = plt.subplots(figsize=(6, 5))
    masked = np.ma.masked_invalid(grid.values)
    mesh = ax.pcolormesh(grid.axis1_values, grid.axis2_values, masked.T,
                         shading="nearest", vmin=0.0, vmax=1.0, cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=grid.observable)
    ax.set_xlabel(f"{grid.axis1_name} (1/T)")
    ax.set_ylabel(f"{grid.axis2_name} (1/T)")
    return _save(fig, path)


def plot_n_scaling(rows: np.ndarray, path) -> Path:
    """Measured vs predicted middle-state transient maximum against N."""

    fig, ax = plt.subplots(figsize=(6, 4))
    n = rows[:, 0]
    ax.semilogy(n, rows[:, 1], "o-", label="predicted")
    ax.semilogy(n, rows[:, 2], "s--", label="measured (five-state)")
    ax.set_xlabel("pulse pairs N")
    ax.set_ylabel("max $P_{g_2}$")
    ax.legend()
    ax.grid(True, alpha=0.3, which="both")
    return _save(fig, path)


def plot_train(report: dict, path) -> Path:
    """Analytic within-step population curves from a train report."""

    from .propagator import train_transients

    angles = report["mixing_angles"]
    area = report["area_per_step"]
    _, curves, _ = train_transients(angles, area)
    fig, ax = plt.subplots(figsize=(8, 4))
    labels = ["$P_{g_1}$", "$P_{g_2}$", "$P_{g_3}$"]
    offset = 0.0
    for k, (areas, pops) in enumerate(curves, start=1):
        for state in range(3):
            ax.plot(offset + areas, pops[:, state], f"C{state}",
                    label=labels[state] if k == 1 else None)
        offset += areas[-1]
        if k < len(curves):
            ax.axvline(offset, color="gray", lw=0.5, alpha=0.5)
    ax.set_xlabel("accumulated rms area (rad)")
    ax.set_ylabel("population")
    ax.legend(fontsize="small")
    ax.grid(True, alpha=0.3)
    return _save(fig, path)
