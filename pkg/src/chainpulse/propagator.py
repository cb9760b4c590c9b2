"""Closed-form propagator of the reduced three-state system under one step.

Within a step the two effective couplings share one time profile, so the
dynamics factorises in a bright/dark basis: the dark combination of the end
states decouples, while the bright combination Rabi-cycles with the middle
state at the root-sum-square coupling.  The resulting single-step propagator
depends only on the mixing angle phi and the rms pulse area A accumulated so
far, and a train of steps is an ordered matrix product of such factors.

Note the corner entries: the bright/dark construction gives
-sin(2*phi)*sin^2(A/4), half of a commonly printed value which would violate
unitarity (the entry would reach magnitude 2).  The implemented form is
unitary by construction and is cross-checked against direct numerical
integration in the test suite.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

from .pulses import FULL_TRANSFER_ANGLE, PulseTrain, RabiSchedule


def step_propagator(phi: float, area: float) -> np.ndarray:
    """Exact 3x3 propagator for one step of mixing angle ``phi`` and rms area ``area``."""

    half = 0.5 * area
    quarter_sq = math.sin(0.25 * area) ** 2
    s, c = math.sin(phi), math.cos(phi)
    u = np.empty((3, 3), dtype=complex)
    u[0, 0] = 1.0 - 2.0 * s * s * quarter_sq
    u[1, 1] = math.cos(half)
    u[2, 2] = 1.0 - 2.0 * c * c * quarter_sq
    u[0, 1] = u[1, 0] = -1j * s * math.sin(half)
    u[1, 2] = u[2, 1] = -1j * c * math.sin(half)
    u[0, 2] = u[2, 0] = -math.sin(2.0 * phi) * quarter_sq
    return u


def train_propagator(angles, area_per_step: float) -> np.ndarray:
    """Ordered product U(phi_N) ... U(phi_1) of single-step propagators."""

    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    if angles.size == 0:
        raise ValueError("train_propagator needs at least one mixing angle")
    u = np.eye(3, dtype=complex)
    for phi in angles:
        u = step_propagator(phi, area_per_step) @ u
    return u


def train_boundary_states(angles, area_per_step: float, initial=None) -> np.ndarray:
    """States at the step boundaries, shape (N+1, 3); row 0 is the initial state."""

    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    state = np.array([1.0, 0.0, 0.0], dtype=complex) if initial is None \
        else np.asarray(initial, dtype=complex)
    states = np.empty((angles.size + 1, 3), dtype=complex)
    states[0] = state
    for k, phi in enumerate(angles):
        states[k + 1] = step_propagator(phi, area_per_step) @ states[k]
    return states


def step_transient_curve(phi: float, area: float, entry, n_points: int = 201):
    """Populations along one step as the running area grows from 0 to ``area``.

    Returns (areas, populations) with populations of shape (n_points, 3);
    continuous between step boundaries since the propagator at partial area
    is the within-step time evolution.
    """

    entry = np.asarray(entry, dtype=complex)
    areas = np.linspace(0.0, area, n_points)
    pops = np.empty((n_points, 3))
    for i, a in enumerate(areas):
        pops[i] = np.abs(step_propagator(phi, a) @ entry) ** 2
    return areas, pops


def train_transients(angles, area_per_step: float, initial=None, n_points: int = 201):
    """Per-step transient curves and middle-state peaks for a whole train.

    Returns (boundary_states, curves, peaks) where ``curves[k]`` is the
    (areas, populations) pair of step k+1 and ``peaks[k]`` the maximum
    middle-state population reached within that step.
    """

    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    states = train_boundary_states(angles, area_per_step, initial)
    curves = []
    peaks = np.empty(angles.size)
    for k in range(angles.size):
        areas, pops = step_transient_curve(angles[k], area_per_step, states[k], n_points)
        curves.append((areas, pops))
        peaks[k] = pops[:, 1].max()
    return states, curves, peaks


def max_intermediate_population(n_pairs: int, target_angle: float = FULL_TRANSFER_ANGLE) -> float:
    """Peak middle-state population of an N-step train, sin^2(target_angle/N).

    Every step of the canonical train peaks at the same value, so the bound
    tightens as 1/N^2 for long trains.
    """

    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    return math.sin(target_angle / n_pairs) ** 2


def rms_pulse_area(schedule: RabiSchedule, k: int) -> float:
    """Root-sum-square area of the effective couplings over step k (1-based).

    Quadrature of sqrt(omega_e1^2 + omega_e2^2) over the step's time slot
    (half a spacing to each side, clipped to the train window).
    """

    train: PulseTrain = schedule.train
    if not 1 <= k <= train.n_pairs:
        raise IndexError(f"step index {k} outside 1..{train.n_pairs}")
    center = train.centers[k - 1]
    t_lo, t_hi = train.window
    lo = max(center - 0.5 * train.spacing, t_lo) if k > 1 else t_lo
    hi = min(center + 0.5 * train.spacing, t_hi) if k < train.n_pairs else t_hi

    def integrand(t):
        e1, e2 = schedule.effective(t)
        return float(np.hypot(e1, e2))

    value, _ = quad(integrand, lo, hi, points=[center], limit=200,
                    epsabs=1e-12, epsrel=1e-12)
    return value
