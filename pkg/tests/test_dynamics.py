import math

import numpy as np
import pytest

from chainpulse import (
    DecayConfig,
    DetuningConfig,
    G1,
    G2,
    G3,
    IntegrationError,
    ae_validity,
    build_schedule,
    effective_hamiltonian,
    integrate,
    integrate_effective,
    integrate_five_state,
    remove_global_phase,
    step_propagator,
)
from chainpulse.states import chain_hamiltonian

DET = DetuningConfig(300.0, 300.0)
TWO_PI = 2.0 * np.pi


def constant_ratio_stack(phi, area, window, dt, width=1.0, center=0.0):
    """Hamiltonian substage stack for Gaussian envelopes of fixed mixing angle."""

    span = window[1] - window[0]
    nsteps = max(1, math.ceil(span / dt - 1e-12))
    times = np.linspace(window[0], window[1], 2 * nsteps + 1)
    eta = area / (width * math.sqrt(math.pi))
    g = eta * np.exp(-((times - center) / width) ** 2)
    stack = np.zeros((times.size, 3, 3), dtype=complex)
    stack[:, 0, 1] = stack[:, 1, 0] = 0.5 * math.sin(phi) * g
    stack[:, 1, 2] = stack[:, 2, 1] = 0.5 * math.cos(phi) * g
    return stack


class TestIntegrate:
    def test_zero_hamiltonian_is_identity(self):
        initial = np.array([0.6, 0.8j, 0.0])
        result = integrate(initial, lambda t: np.zeros((3, 3)), (0.0, 1.0), 1e-2)
        np.testing.assert_allclose(result.final_amplitudes, initial, atol=1e-15)
        assert result.norm_loss == pytest.approx(0.0, abs=1e-15)

    def test_single_step_matches_analytic_propagator(self):
        # N=1, phi=pi/4, area 2*pi transfers everything into the third state
        stack = constant_ratio_stack(np.pi / 4, TWO_PI, (-5.0, 5.0), 1e-3)
        result = integrate([1.0, 0.0, 0.0], stack, (-5.0, 5.0), 1e-3)
        np.testing.assert_allclose(result.final_populations, [0, 0, 1], atol=1e-6)

    def test_oracle_equivalence_random_pairs(self, rng):
        # the closed-form step propagator reproduces direct integration
        for _ in range(5):
            phi = rng.uniform(0.1, np.pi / 2 - 0.1)
            area = rng.uniform(0.5, 4 * np.pi)
            initial = rng.normal(size=3) + 1j * rng.normal(size=3)
            initial /= np.linalg.norm(initial)
            stack = constant_ratio_stack(phi, area, (-5.0, 5.0), 1e-3)
            result = integrate(initial, stack, (-5.0, 5.0), 1e-3)
            expected = step_propagator(phi, area) @ initial
            assert np.max(np.abs(result.final_amplitudes - expected)) < 1e-6

    def test_callable_and_stack_sources_agree(self):
        schedule = build_schedule(1, DET)

        def h_of_t(t):
            e1, e2 = schedule.effective(t)
            return chain_hamiltonian([e1, e2], np.zeros(3))

        window = (-2.0, 2.0)
        from_callable = integrate([1.0, 0, 0], h_of_t, window, 1e-3)
        chain = integrate_effective(schedule, dt=1e-3, window=window)
        assert np.max(np.abs(from_callable.final_amplitudes
                             - chain.final_amplitudes)) < 1e-13

    def test_rejects_unnormalized_initial(self):
        with pytest.raises(ValueError, match="normalized"):
            integrate([1.0, 1.0, 0.0], lambda t: np.zeros((3, 3)), (0.0, 1.0), 1e-2)

    def test_rejects_bad_window_and_dt(self):
        with pytest.raises(ValueError, match="window"):
            integrate([1, 0, 0], lambda t: np.zeros((3, 3)), (1.0, 1.0), 1e-2)
        with pytest.raises(ValueError, match="dt"):
            integrate([1, 0, 0], lambda t: np.zeros((3, 3)), (0.0, 1.0), 0.0)

    def test_rejects_too_large_step(self):
        schedule = build_schedule(1, DET)
        with pytest.raises(IntegrationError, match="dt"):
            integrate_five_state(schedule, dt=1e-3)

    def test_nonfinite_hamiltonian_aborts(self):
        def h_of_t(t):
            h = np.zeros((2, 2))
            h[0, 1] = h[1, 0] = np.nan
            return h

        with pytest.raises(IntegrationError, match="non-finite"):
            integrate([1.0, 0.0], h_of_t, (0.0, 0.1), 1e-3)


class TestFiveState:
    def test_norm_conserved_without_decay(self, fig2_result):
        assert np.max(np.abs(1.0 - fig2_result.norms)) < 1e-8
        assert abs(fig2_result.norm_loss) < 1e-8

    def test_populations_bounded(self, fig2_result):
        assert fig2_result.populations.min() >= 0.0
        assert fig2_result.populations.max() <= 1.0 + 1e-12

    def test_transfer_and_transient(self, fig2_result):
        assert fig2_result.final_populations[G3] >= 0.99
        assert fig2_result.max_transients[G2] == pytest.approx(0.0245, abs=0.002)

    def test_norm_monotone_with_decay(self, fig2_schedule):
        result = integrate_five_state(fig2_schedule, decay=DecayConfig(0.1, 0.01, 0.1))
        assert np.all(np.diff(result.norms) <= 1e-12)
        assert 0.0 < result.norm_loss < 1.0

    def test_agrees_with_effective_three_state(self, fig2_schedule, fig2_result):
        reduced = integrate_effective(fig2_schedule)
        ground = fig2_result.final_populations[[G1, G2, G3]]
        assert np.max(np.abs(ground - reduced.final_populations)) < 0.02

    def test_convergence_is_fourth_order(self):
        # detuning low enough that the error ladder sits above roundoff
        schedule = build_schedule(1, DetuningConfig(30.0, 30.0))

        def final(dt):
            return integrate_five_state(schedule, dt=dt, samples=2).final_amplitudes

        reference = final(2.5e-4)
        coarse = np.max(np.abs(final(2e-3) - reference))
        fine = np.max(np.abs(final(1e-3) - reference))
        assert 13.0 < coarse / fine < 19.0

    def test_effective_convergence_is_fourth_order(self, fig2_schedule):
        def final(dt):
            return integrate_effective(fig2_schedule, dt=dt, samples=2).final_amplitudes

        reference = final(1e-3)
        coarse = np.max(np.abs(final(8e-3) - reference))
        fine = np.max(np.abs(final(4e-3) - reference))
        assert 13.0 < coarse / fine < 19.0


class TestEffectiveHamiltonian:
    def test_zero_fields_zero_matrix(self):
        h = effective_hamiltonian(0.0, 0.0, 0.0, 0.0, DET)
        np.testing.assert_array_equal(h, np.zeros((3, 3)))

    def test_first_pair_only(self):
        omega = 2.0
        h = effective_hamiltonian(omega, omega, 0.0, 0.0, DET)
        shift = -(omega**2) / (2.0 * DET.delta1)
        np.testing.assert_allclose(h[0, 0], shift / 2.0, rtol=1e-15)
        np.testing.assert_allclose(h[1, 1], shift / 2.0, rtol=1e-15)
        np.testing.assert_allclose(h[0, 1], shift / 2.0, rtol=1e-15)
        assert h[2, 2] == 0.0 and h[1, 2] == 0.0

    @pytest.mark.parametrize("det", [DET, DetuningConfig(360.0, 300.0)])
    def test_constrained_fields_equalize_diagonal(self, det):
        schedule = build_schedule(3, det)
        for t in np.linspace(*schedule.window, 17):
            o1, o2, o3, o4 = schedule.physical(float(t))
            h = effective_hamiltonian(o1, o2, o3, o4, det)
            diag = np.real(np.diag(h))
            np.testing.assert_allclose(diag, diag[0], rtol=1e-12, atol=1e-300)

    def test_zero_detuning_rejected(self):
        with pytest.raises(ValueError):
            effective_hamiltonian(1, 1, 1, 1, DetuningConfig(300.0, 0.0))


class _StubSchedule:
    """Minimal schedule double for margin-definition tests."""

    def __init__(self, det, drives):
        self.train = type("T", (), {"det": det})()
        self._drives = drives

    def sample_times(self, count):
        return np.linspace(0.0, 1.0, count)

    def physical(self, times):
        shape = np.shape(times)
        return tuple(np.full(shape, d) for d in self._drives)


class TestAeValidity:
    def test_reference_margins(self, fig2_schedule):
        report = ae_validity(fig2_schedule)
        assert report.margin_first == pytest.approx(report.margin_second, rel=1e-12)
        assert 4.0 < report.worst < 6.0
        assert report.rating == "weak"

    def test_zero_drive_unbounded(self):
        stub = _StubSchedule(DET, (0.0, 0.0, 0.0, 0.0))
        report = ae_validity(stub)
        assert math.isinf(report.margin_first)
        assert math.isinf(report.margin_second)
        assert report.rating == "good"

    def test_margin_exactly_one(self):
        # drive chosen so the peak root-sum-square equals the detuning
        stub = _StubSchedule(DetuningConfig(5.0, 300.0), (3.0, 4.0, 1.0, 1.0))
        report = ae_validity(stub)
        assert report.margin_first == pytest.approx(1.0, rel=1e-15)

    def test_rating_thresholds(self):
        det = DetuningConfig(100.0, 100.0)
        assert ae_validity(_StubSchedule(det, (10.0, 0.0, 10.0, 0.0))).rating == "good"
        assert ae_validity(_StubSchedule(det, (15.0, 0.0, 15.0, 0.0))).rating == "marginal"
        assert ae_validity(_StubSchedule(det, (30.0, 0.0, 30.0, 0.0))).rating == "weak"


class TestRemoveGlobalPhase:
    def test_populations_unchanged(self, rng):
        times = np.linspace(0.0, 3.0, 50)
        amps = rng.normal(size=(50, 3)) + 1j * rng.normal(size=(50, 3))
        shifted = remove_global_phase(amps, np.sin(times), times)
        np.testing.assert_allclose(np.abs(shifted), np.abs(amps), rtol=1e-13)

    def test_zero_shift_is_identity(self, rng):
        times = np.linspace(0.0, 2.0, 20)
        amps = rng.normal(size=(20, 2)) + 1j * rng.normal(size=(20, 2))
        np.testing.assert_array_equal(remove_global_phase(amps, 0.0, times), amps)

    def test_constant_shift_rotates_at_that_rate(self):
        delta_e = 1.7
        times = np.linspace(0.0, 5.0, 200)
        steady = np.array([0.3, 0.5, 0.2 + 0.1j])
        rotating = steady[None, :] * np.exp(-1j * delta_e * times)[:, None]
        recovered = remove_global_phase(rotating, delta_e, times)
        np.testing.assert_allclose(recovered, np.broadcast_to(steady, (200, 3)),
                                   atol=1e-12)
