"""Coincident pulse trains for a five-state chainwise quantum system.

Population transfer and superposition engineering between the end states of
a g1-e1-g2-e2-g3 chain: train design and field synthesis, an exact
closed-form propagator for the reduced three-state system, fixed-step
Schrodinger integration of the full chain (optionally with decay), and
parameter-scan experiments.
"""

__version__ = "0.1.0"

from .dynamics import (
    AeValidityReport,
    IntegrationError,
    SimulationResult,
    ae_validity,
    effective_hamiltonian,
    integrate,
    integrate_effective,
    integrate_five_state,
    remove_global_phase,
)
from .experiments import (
    ScanGrid,
    grid_axis,
    n_scaling,
    run_dynamics_experiment,
    scan_one_photon,
    scan_two_photon,
    sign_flip_asymmetry,
)
from .propagator import (
    max_intermediate_population,
    rms_pulse_area,
    step_propagator,
    train_boundary_states,
    train_propagator,
    train_transients,
)
from .pulses import (
    EQUAL_SPLIT_ANGLE,
    FULL_TRANSFER_ANGLE,
    PulseTrain,
    RabiSchedule,
    SynthesisError,
    build_schedule,
    design_train,
    effective_from_physical,
    gaussian_effective_envelopes,
    mixing_angles,
    synthesize_physical_pulses,
)
from .states import (
    BASIS_FULL,
    BASIS_REDUCED,
    DecayConfig,
    DetuningConfig,
    E1,
    E2,
    G1,
    G2,
    G3,
    NO_DECAY,
    basis_state,
    build_full_hamiltonian,
    dark_state,
    populations,
)

__all__ = [
    "__version__",
    "AeValidityReport", "IntegrationError", "SimulationResult",
    "ae_validity", "effective_hamiltonian", "integrate",
    "integrate_effective", "integrate_five_state", "remove_global_phase",
    "ScanGrid", "grid_axis", "n_scaling", "run_dynamics_experiment",
    "scan_one_photon", "scan_two_photon", "sign_flip_asymmetry",
    "max_intermediate_population", "rms_pulse_area", "step_propagator",
    "train_boundary_states", "train_propagator", "train_transients",
    "EQUAL_SPLIT_ANGLE", "FULL_TRANSFER_ANGLE", "PulseTrain", "RabiSchedule",
    "SynthesisError", "build_schedule", "design_train",
    "effective_from_physical", "gaussian_effective_envelopes",
    "mixing_angles", "synthesize_physical_pulses",
    "BASIS_FULL", "BASIS_REDUCED", "DecayConfig", "DetuningConfig",
    "E1", "E2", "G1", "G2", "G3", "NO_DECAY", "basis_state",
    "build_full_hamiltonian", "dark_state", "populations",
]
