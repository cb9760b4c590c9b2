import numpy as np
import pytest

from chainpulse import DetuningConfig, build_schedule, integrate_five_state


@pytest.fixture(scope="session")
def baseline_det():
    return DetuningConfig(300.0, 300.0)


@pytest.fixture(scope="session")
def fig2_schedule(baseline_det):
    """The reference configuration: N=5 pairs, equal detunings of 300/T."""

    return build_schedule(5, baseline_det)


@pytest.fixture(scope="session")
def fig2_result(fig2_schedule):
    """Full five-state run of the reference configuration (shared across tests)."""

    return integrate_five_state(fig2_schedule)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
