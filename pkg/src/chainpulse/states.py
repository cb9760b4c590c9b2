"""Five-state chain basis, detuning/decay configuration, and Hamiltonian assembly.

The chain couples nearest neighbours only,

    g1 -- e1 -- g2 -- e2 -- g3,

and every module in the package shares the basis ordering
``(g1, e1, g2, e2, g3)``.  State vectors are plain complex ndarrays in that
ordering (length 5 for the full chain, length 3 for the reduced ground
manifold ``(g1, g2, g3)``).

Unit convention: times in units of the envelope width T, rates and detunings
in 1/T.  Hamiltonians carry angular-frequency units (hbar = 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BASIS_FULL = ("g1", "e1", "g2", "e2", "g3")
BASIS_REDUCED = ("g1", "g2", "g3")
G1, E1, G2, E2, G3 = range(5)


@dataclass(frozen=True)
class DetuningConfig:
    """One- and two-photon detunings of the four driving fields.

    ``delta1``/``delta2`` are the one-photon detunings of the e1/e2
    transitions; ``small_delta1``/``small_delta2`` are the two-photon
    detunings of the first (g1-g2) and second (g2-g3) Raman pairs.
    The ratio ``zeta = delta1/delta2`` is always recomputed, never stored.
    """

    delta1: float
    delta2: float
    small_delta1: float = 0.0
    small_delta2: float = 0.0

    def __post_init__(self):
        for name in ("delta1", "delta2", "small_delta1", "small_delta2"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")

    @property
    def zeta(self) -> float:
        if self.delta2 == 0.0:
            raise ValueError("zeta undefined for delta2 = 0")
        return self.delta1 / self.delta2


@dataclass(frozen=True)
class DecayConfig:
    """Decay rates of the three intermediate states (e1, g2, e2), each >= 0."""

    gamma_e1: float = 0.0
    gamma_g2: float = 0.0
    gamma_e2: float = 0.0

    def __post_init__(self):
        for name in ("gamma_e1", "gamma_g2", "gamma_e2"):
            rate = getattr(self, name)
            if not np.isfinite(rate) or rate < 0.0:
                raise ValueError(f"{name} must be a non-negative finite rate, got {rate!r}")

    @property
    def is_zero(self) -> bool:
        return self.gamma_e1 == 0.0 and self.gamma_g2 == 0.0 and self.gamma_e2 == 0.0


NO_DECAY = DecayConfig()


def chain_hamiltonian(couplings, diagonal) -> np.ndarray:
    """Assemble a dense nearest-neighbour chain Hamiltonian.

    ``couplings`` are the d-1 Rabi frequencies on the sub/super diagonal and
    ``diagonal`` the d (possibly complex) diagonal angular frequencies; the
    conventional factor 1/2 multiplies the couplings only.  Entries farther
    than one step off the diagonal are exactly zero.
    """

    couplings = np.asarray(couplings, dtype=float)
    diagonal = np.asarray(diagonal, dtype=complex)
    d = diagonal.shape[0]
    if couplings.shape != (d - 1,):
        raise ValueError(f"expected {d - 1} couplings for dimension {d}")
    h = np.zeros((d, d), dtype=complex)
    idx = np.arange(d - 1)
    h[idx, idx + 1] = couplings / 2.0
    h[idx + 1, idx] = couplings / 2.0
    h[np.arange(d), np.arange(d)] = diagonal
    return h


def full_hamiltonian_diagonal(det: DetuningConfig, decay: DecayConfig = NO_DECAY) -> np.ndarray:
    """Constant diagonal of the five-state Hamiltonian, including decay.

    The two-photon detunings enter as cumulative rotating-frame shifts
    (g2 at small_delta1, e2 at delta2 + small_delta1, g3 at
    small_delta1 + small_delta2); non-Hermitian decay subtracts i*gamma/2 on
    the intermediate states.  The cumulative placement is a modeling choice:
    each Raman pair's residual detuning offsets everything further down the
    chain.
    """

    diag = np.array(
        [
            0.0,
            det.delta1,
            det.small_delta1,
            det.delta2 + det.small_delta1,
            det.small_delta1 + det.small_delta2,
        ],
        dtype=complex,
    )
    diag -= 0.5j * np.array([0.0, decay.gamma_e1, decay.gamma_g2, decay.gamma_e2, 0.0])
    return diag


def build_full_hamiltonian(t, schedule, det: DetuningConfig,
                           decay: DecayConfig = NO_DECAY) -> np.ndarray:
    """Five-state chain Hamiltonian at time ``t`` for a synthesized schedule.

    Returns the 5x5 complex matrix with couplings from
    ``schedule.physical(t)``, one-photon detunings on the excited states,
    cumulative two-photon shifts on g2/g3, and -i*gamma/2 decay terms.
    Hermitian whenever all decay rates vanish.
    """

    omegas = np.array(schedule.physical(t), dtype=float)
    if not np.all(np.isfinite(omegas)):
        raise ValueError(f"schedule produced non-finite Rabi frequencies at t={t}")
    return chain_hamiltonian(omegas, full_hamiltonian_diagonal(det, decay))


def dark_state(omega1: float, omega2: float, omega3: float, omega4: float) -> np.ndarray:
    """Normalized zero-eigenvalue state of the resonant, decay-free chain.

    Proportional to (omega2*omega4, 0, -omega1*omega4, 0, omega1*omega3);
    raises if all three products vanish, since the state is then undefined.
    """

    components = np.array(
        [omega2 * omega4, 0.0, -omega1 * omega4, 0.0, omega1 * omega3],
        dtype=complex,
    )
    norm = np.linalg.norm(components)
    if norm == 0.0:
        raise ValueError(
            "dark state undefined: omega2*omega4, omega1*omega4 and omega1*omega3 all vanish"
        )
    return components / norm


def populations(state) -> np.ndarray:
    """Elementwise probabilities |c_i|^2 (sums to the squared norm)."""

    state = np.asarray(state)
    return np.abs(state) ** 2


def basis_state(index: int, dim: int = 5) -> np.ndarray:
    """Unit vector along one basis state."""

    state = np.zeros(dim, dtype=complex)
    state[index] = 1.0
    return state
