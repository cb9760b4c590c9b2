"""Design of coincident pulse trains and synthesis of the four physical fields.

A train of N steps drives the reduced ground manifold with two effective
couplings that share one Gaussian profile per step and differ only by the
mixing angle, tan(phi_k) = ratio of the two couplings.  Inverting the
adiabatic-elimination relations turns each step into four physical fields
that again share a single (sqrt(2)-wider) Gaussian profile with fixed
amplitude ratios 1 : sin(phi_k) : sqrt(1/zeta)*cos(phi_k) : sqrt(1/zeta),
which is what makes the pulses "coincident".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .states import DetuningConfig

FULL_TRANSFER_ANGLE = math.pi / 4
EQUAL_SPLIT_ANGLE = math.pi / 8
DEFAULT_AREA = 2.0 * math.pi
DEFAULT_SPACING_FACTOR = 6.0  # in units of the stretched width, keeps step overlap < e^-18
MIN_SPACING_FACTOR = 4.0
WINDOW_PAD_FACTOR = 5.0


class SynthesisError(ValueError):
    """Raised when the requested fields cannot be realised as real amplitudes."""


def mixing_angles(n_pairs: int, target_angle: float = FULL_TRANSFER_ANGLE) -> np.ndarray:
    """Mixing angles phi_k = (2k-1)*target_angle/N for steps k = 1..N.

    ``target_angle`` sets the final split between the two end states:
    pi/4 gives complete transfer, pi/8 an equal superposition, pi/12 a
    3:1 split.  The angles increase strictly and stay inside (0, pi/2).
    """

    if not isinstance(n_pairs, (int, np.integer)) or n_pairs < 1:
        raise ValueError(f"n_pairs must be a positive integer, got {n_pairs!r}")
    if not 0.0 < target_angle <= FULL_TRANSFER_ANGLE:
        raise ValueError(
            f"target_angle must lie in (0, pi/4], got {target_angle!r}"
        )
    k = np.arange(1, n_pairs + 1, dtype=float)
    return (2.0 * k - 1.0) * target_angle / n_pairs


@dataclass(frozen=True)
class PulseTrain:
    """Geometry and amplitudes of a designed coincident-pulse train.

    ``width`` is the Gaussian width T of the effective (two-photon)
    envelopes; the physical fields are sqrt(2) wider.  ``peak_effective_rabi``
    is the per-step peak of the root-sum-square effective coupling, fixed by
    the requested per-step rms area (area = peak * width * sqrt(pi)).
    ``amp_a``/``amp_b`` are the positive peak amplitudes of the fields on the
    first/second half of the chain, sqrt(2*|delta|*peak_effective_rabi).
    """

    n_pairs: int
    target_angle: float
    width: float
    spacing: float
    area: float
    det: DetuningConfig
    angles: tuple[float, ...]
    centers: tuple[float, ...]
    peak_effective_rabi: float
    amp_a: float
    amp_b: float

    def __post_init__(self):
        if self.width <= 0.0:
            raise ValueError("width must be positive")
        if self.area <= 0.0:
            raise ValueError("area must be positive")
        angles = np.asarray(self.angles)
        if np.any(angles <= 0.0) or np.any(angles >= math.pi / 2):
            raise ValueError("mixing angles must lie strictly inside (0, pi/2)")
        if np.any(np.diff(angles) <= 0.0):
            raise ValueError("mixing angles must increase strictly")
        if self.n_pairs > 1:
            gaps = np.diff(self.centers)
            min_gap = MIN_SPACING_FACTOR * self.stretched_width
            if np.any(gaps < min_gap - 1e-12):
                raise ValueError(
                    f"step spacing {gaps.min():g} below minimum {min_gap:g} "
                    "(steps would overlap materially)"
                )

    @property
    def stretched_width(self) -> float:
        return math.sqrt(2.0) * self.width

    @property
    def window(self) -> tuple[float, float]:
        pad = WINDOW_PAD_FACTOR * self.stretched_width
        return (self.centers[0] - pad, self.centers[-1] + pad)


def design_train(n_pairs: int, det: DetuningConfig,
                 target_angle: float = FULL_TRANSFER_ANGLE,
                 width: float = 1.0, spacing: float | None = None,
                 area: float = DEFAULT_AREA) -> PulseTrain:
    """Lay out a train of ``n_pairs`` steps for the given detunings.

    Step centers start at t = 0 and are spaced ``spacing`` apart (default
    6*sqrt(2)*width).  The one-photon detunings must be nonzero and share a
    sign, otherwise the amplitude square roots would be imaginary.
    """

    if spacing is None:
        spacing = DEFAULT_SPACING_FACTOR * math.sqrt(2.0) * width
    if det.delta1 == 0.0 or det.delta2 == 0.0:
        raise SynthesisError("synthesis needs nonzero one-photon detunings delta1, delta2")
    if det.delta1 * det.delta2 < 0.0:
        raise SynthesisError(
            "Stark-shift equalization requires delta1 and delta2 of the same sign "
            f"(got delta1={det.delta1:g}, delta2={det.delta2:g})"
        )
    omega0 = area / (width * math.sqrt(math.pi))
    angles = tuple(float(phi) for phi in mixing_angles(n_pairs, target_angle))
    centers = tuple(k * spacing for k in range(n_pairs))
    return PulseTrain(
        n_pairs=n_pairs,
        target_angle=target_angle,
        width=width,
        spacing=spacing,
        area=area,
        det=det,
        angles=angles,
        centers=centers,
        peak_effective_rabi=omega0,
        amp_a=math.sqrt(2.0 * abs(det.delta1) * omega0),
        amp_b=math.sqrt(2.0 * abs(det.delta2) * omega0),
    )


def _check_step(train: PulseTrain, k: int) -> int:
    if not 1 <= k <= train.n_pairs:
        raise IndexError(f"step index {k} outside 1..{train.n_pairs}")
    return k - 1


def gaussian_effective_envelopes(train: PulseTrain, k: int, t):
    """Designed effective couplings of step k (1-based) at time ``t``.

    Both share the Gaussian exp(-(t-tau_k)^2/T^2); the first is scaled by
    sin(phi_k), the second by cos(phi_k), of the common peak.
    """

    i = _check_step(train, k)
    g = np.exp(-(((np.asarray(t, dtype=float)) - train.centers[i]) / train.width) ** 2)
    omega0 = train.peak_effective_rabi
    return omega0 * math.sin(train.angles[i]) * g, omega0 * math.cos(train.angles[i]) * g


def synthesize_physical_pulses(train: PulseTrain, k: int, t):
    """Four physical Rabi frequencies of step k (1-based) at time ``t``.

    All four share exp(-(t-tau_k)^2/(sqrt(2)T)^2) with amplitudes
    (amp_a, amp_a*sin(phi_k), amp_b*cos(phi_k), amp_b); driving the chain
    with these reproduces the designed effective couplings in magnitude and
    equalizes the intensity-induced Stark shifts across the ground manifold.
    """

    i = _check_step(train, k)
    g = np.exp(
        -(((np.asarray(t, dtype=float)) - train.centers[i]) / train.stretched_width) ** 2
    )
    phi = train.angles[i]
    return (
        train.amp_a * g,
        train.amp_a * math.sin(phi) * g,
        train.amp_b * math.cos(phi) * g,
        train.amp_b * g,
    )


def effective_from_physical(omega2, omega3, det: DetuningConfig):
    """Two-photon couplings produced by given middle-field amplitudes.

    Adiabatic elimination of the far-detuned excited states, with the outer
    fields slaved to the Stark-equalization constraint, yields

        omega_e1 = -omega2 * sqrt(omega2^2 + zeta*omega3^2) / (2*delta1)
        omega_e2 = -omega3 * sqrt(omega3^2 + omega2^2/zeta) / (2*delta2)

    with zeta = delta1/delta2.  The minus signs are the usual second-order
    perturbative ones; magnitudes match the designed envelopes.
    """

    if det.delta1 == 0.0 or det.delta2 == 0.0:
        raise ValueError("effective couplings undefined for zero one-photon detuning")
    zeta = det.zeta
    omega2 = np.asarray(omega2, dtype=float)
    omega3 = np.asarray(omega3, dtype=float)
    e1 = -omega2 * np.sqrt(omega2**2 + zeta * omega3**2) / (2.0 * det.delta1)
    e2 = -omega3 * np.sqrt(omega3**2 + omega2**2 / zeta) / (2.0 * det.delta2)
    return e1, e2


class RabiSchedule:
    """Closed-form samplers for a whole train of coincident pulses.

    ``physical(t)`` sums the per-step Gaussians of the two middle fields and
    re-derives the outer fields from the Stark-equalization constraint, so
    the constraint holds identically even in the (tiny) overlap tails between
    steps.  ``effective(t)`` samples the designed two-photon envelopes.
    """

    def __init__(self, train: PulseTrain):
        self.train = train
        self._angles = np.asarray(train.angles)
        self._centers = np.asarray(train.centers)

    @property
    def window(self) -> tuple[float, float]:
        return self.train.window

    def _profiles(self, t, width):
        """Sine/cosine-weighted sums of per-step Gaussians of given width."""

        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        u = (np.atleast_1d(t)[:, None] - self._centers) / width
        g = np.exp(-(u**2))
        # row-wise pairwise sums keep scalar and array sampling bit-identical
        s = (g * np.sin(self._angles)).sum(axis=1)
        c = (g * np.cos(self._angles)).sum(axis=1)
        if scalar:
            return s[0], c[0]
        return s, c

    def stretched_profiles(self, t):
        """(sin-sum, cos-sum, root-sum-square) of the physical-width Gaussians."""

        s, c = self._profiles(t, self.train.stretched_width)
        return s, c, np.hypot(s, c)

    def effective(self, t):
        """Designed effective couplings (positive amplitudes) at time ``t``."""

        s, c = self._profiles(t, self.train.width)
        omega0 = self.train.peak_effective_rabi
        return omega0 * s, omega0 * c

    def physical(self, t):
        """The four physical Rabi frequencies at time ``t``."""

        s, c, r = self.stretched_profiles(t)
        train = self.train
        return train.amp_a * r, train.amp_a * s, train.amp_b * c, train.amp_b * r

    def sample_times(self, count: int = 2000) -> np.ndarray:
        start, end = self.window
        return np.linspace(start, end, count)


def build_schedule(n_pairs: int, det: DetuningConfig,
                   target_angle: float = FULL_TRANSFER_ANGLE,
                   width: float = 1.0, spacing: float | None = None,
                   area: float = DEFAULT_AREA) -> RabiSchedule:
    """Design a train and wrap it in its sampling schedule."""

    return RabiSchedule(design_train(n_pairs, det, target_angle=target_angle,
                                     width=width, spacing=spacing, area=area))
