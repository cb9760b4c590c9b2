import math

import numpy as np
import pytest
from scipy.integrate import quad

from chainpulse import (
    DetuningConfig,
    SynthesisError,
    build_schedule,
    design_train,
    effective_from_physical,
    gaussian_effective_envelopes,
    mixing_angles,
    synthesize_physical_pulses,
)

DET = DetuningConfig(300.0, 300.0)


class TestMixingAngles:
    def test_single_pair_full_transfer(self):
        np.testing.assert_allclose(mixing_angles(1), [np.pi / 4])

    def test_five_pairs_full_transfer(self):
        expected = np.array([1, 3, 5, 7, 9]) * np.pi / 20.0
        np.testing.assert_allclose(mixing_angles(5), expected, rtol=1e-15)

    def test_five_pairs_equal_split(self):
        expected = np.array([1, 3, 5, 7, 9]) * np.pi / 40.0
        np.testing.assert_allclose(mixing_angles(5, np.pi / 8), expected, rtol=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 5, 9, 16])
    def test_midpoint_symmetry(self, n):
        phi = mixing_angles(n)
        np.testing.assert_allclose(phi + phi[::-1], np.pi / 2, rtol=1e-15)

    @pytest.mark.parametrize("n", [1, 3, 8, 25])
    def test_strictly_increasing_in_range(self, n):
        for target in (np.pi / 4, np.pi / 8, np.pi / 12):
            phi = mixing_angles(n, target)
            assert np.all(np.diff(phi) > 0)
            assert phi[0] > 0 and phi[-1] < np.pi / 2

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            mixing_angles(0)
        with pytest.raises(ValueError):
            mixing_angles(3, 0.0)
        with pytest.raises(ValueError):
            mixing_angles(3, np.pi / 3)


class TestEffectiveEnvelopes:
    def test_peak_values_at_center(self):
        train = design_train(1, DET)  # single step, phi = pi/4
        e1, e2 = gaussian_effective_envelopes(train, 1, train.centers[0])
        expected = train.peak_effective_rabi / np.sqrt(2.0)
        assert e1 == pytest.approx(expected, rel=1e-15)
        assert e2 == pytest.approx(expected, rel=1e-15)

    def test_vanishes_far_away(self):
        train = design_train(1, DET)
        e1, e2 = gaussian_effective_envelopes(train, 1, 1e4)
        assert e1 == 0.0 and e2 == 0.0

    def test_rms_area_by_quadrature(self):
        # isolated step: integral of the root-sum-square envelope is the area
        train = design_train(3, DET)
        value, _ = quad(
            lambda t: math.hypot(*gaussian_effective_envelopes(train, 2, t)),
            train.centers[1] - 8.0, train.centers[1] + 8.0, limit=200)
        assert value == pytest.approx(2.0 * np.pi, rel=1e-9)

    def test_step_index_bounds(self):
        train = design_train(2, DET)
        with pytest.raises(IndexError):
            gaussian_effective_envelopes(train, 0, 0.0)
        with pytest.raises(IndexError):
            gaussian_effective_envelopes(train, 3, 0.0)


class TestSynthesis:
    def test_peak_amplitude_recovers_effective_peak(self):
        # amp_a^2/(2*delta1) must give back the designed peak rabi
        train = design_train(5, DET)
        assert train.amp_a**2 / (2.0 * DET.delta1) == pytest.approx(
            train.peak_effective_rabi, rel=1e-14)
        assert train.amp_a == pytest.approx(46.1188098403094, rel=1e-12)

    def test_round_trip_to_effective_envelope(self):
        # product of the two first-half fields over 2*delta1 rebuilds the
        # designed narrow Gaussian at every time
        train = design_train(4, DET, target_angle=np.pi / 8)
        for k in (1, 3):
            for t in np.linspace(train.centers[k - 1] - 3, train.centers[k - 1] + 3, 11):
                o1, o2, o3, o4 = synthesize_physical_pulses(train, k, t)
                e1, e2 = gaussian_effective_envelopes(train, k, t)
                assert o1 * o2 / (2.0 * DET.delta1) == pytest.approx(e1, rel=1e-12, abs=1e-300)
                assert o3 * o4 / (2.0 * DET.delta2) == pytest.approx(e2, rel=1e-12, abs=1e-300)

    def test_amplitude_ratios_unit_zeta(self):
        train = design_train(3, DET)
        phi = train.angles[1]
        t = train.centers[1] + 0.8
        o1, o2, o3, o4 = synthesize_physical_pulses(train, 2, t)
        assert o2 / o1 == pytest.approx(math.sin(phi), rel=1e-13)
        assert o3 / o1 == pytest.approx(math.cos(phi), rel=1e-13)
        assert o4 / o1 == pytest.approx(1.0, rel=1e-13)

    def test_amplitude_ratios_general_zeta(self):
        det = DetuningConfig(240.0, 300.0)  # zeta = 0.8
        train = design_train(3, det)
        phi = train.angles[2]
        root_inv_zeta = math.sqrt(1.0 / det.zeta)
        o1, o2, o3, o4 = synthesize_physical_pulses(train, 3, train.centers[2])
        assert o2 / o1 == pytest.approx(math.sin(phi), rel=1e-13)
        assert o3 / o1 == pytest.approx(root_inv_zeta * math.cos(phi), rel=1e-13)
        assert o4 / o1 == pytest.approx(root_inv_zeta, rel=1e-13)

    def test_coincident_profile_within_step(self):
        # all four fields share one time profile: pointwise ratios are constant
        train = design_train(2, DetuningConfig(500.0, 250.0))
        t = np.linspace(train.centers[0] - 4, train.centers[0] + 4, 401)
        o1, o2, o3, o4 = synthesize_physical_pulses(train, 1, t)
        for field in (o2, o3, o4):
            ratio = field / o1
            assert np.max(np.abs(ratio - ratio[0])) < 1e-12

    def test_mixed_sign_detunings_rejected(self):
        with pytest.raises(SynthesisError, match="sign"):
            design_train(2, DetuningConfig(300.0, -300.0))

    def test_zero_detuning_rejected(self):
        with pytest.raises(SynthesisError, match="nonzero"):
            design_train(2, DetuningConfig(0.0, 300.0))

    def test_both_negative_detunings_allowed(self):
        train_neg = design_train(2, DetuningConfig(-300.0, -300.0))
        train_pos = design_train(2, DET)
        assert train_neg.amp_a == train_pos.amp_a
        assert train_neg.amp_b == train_pos.amp_b


class TestEffectiveFromPhysical:
    def test_zero_first_pair(self):
        e1, e2 = effective_from_physical(0.0, 3.0, DET)
        assert e1 == 0.0
        assert e2 == pytest.approx(-9.0 / 600.0, rel=1e-15)

    def test_equal_fields_unit_zeta(self):
        omega = 2.5
        e1, e2 = effective_from_physical(omega, omega, DET)
        expected = -omega**2 * math.sqrt(2.0) / 600.0
        assert e1 == pytest.approx(expected, rel=1e-15)
        assert e2 == pytest.approx(expected, rel=1e-15)

    def test_closure_with_synthesis(self):
        # magnitudes of the derived couplings equal the designed envelopes
        det = DetuningConfig(360.0, 300.0)  # zeta = 1.2
        train = design_train(3, det, target_angle=np.pi / 8)
        t = np.linspace(train.centers[1] - 2.5, train.centers[1] + 2.5, 21)
        _, o2, o3, _ = synthesize_physical_pulses(train, 2, t)
        d1, d2 = effective_from_physical(o2, o3, det)
        e1, e2 = gaussian_effective_envelopes(train, 2, t)
        np.testing.assert_allclose(np.abs(d1), e1, rtol=1e-12)
        np.testing.assert_allclose(np.abs(d2), e2, rtol=1e-12)
        assert np.all(d1 <= 0.0) and np.all(d2 <= 0.0)

    def test_zero_detuning_rejected(self):
        with pytest.raises(ValueError):
            effective_from_physical(1.0, 1.0, DetuningConfig(0.0, 1.0))


class TestSchedule:
    @pytest.mark.parametrize("det", [DET, DetuningConfig(240.0, 300.0)])
    def test_amplitude_constraint_everywhere(self, det):
        # o1 = sqrt(zeta)*o4 = sqrt(o2^2 + zeta*o3^2) across the whole window
        schedule = build_schedule(5, det)
        t = schedule.sample_times(2001)
        o1, o2, o3, o4 = schedule.physical(t)
        np.testing.assert_allclose(o1, np.sqrt(det.zeta) * o4, rtol=1e-12)
        np.testing.assert_allclose(o1, np.sqrt(o2**2 + det.zeta * o3**2), rtol=1e-12)

    def test_matches_per_step_forms_near_centers(self):
        schedule = build_schedule(3, DET)
        train = schedule.train
        t = np.linspace(train.centers[1] - 2.0, train.centers[1] + 2.0, 41)
        summed = schedule.physical(t)
        per_step = synthesize_physical_pulses(train, 2, t)
        for a, b in zip(summed, per_step):
            np.testing.assert_allclose(a, b, rtol=1e-6)

    def test_window_and_stretched_width(self):
        train = design_train(2, DET, width=1.5)
        assert train.stretched_width == pytest.approx(1.5 * math.sqrt(2.0))
        lo, hi = train.window
        assert lo == pytest.approx(-5.0 * train.stretched_width)
        assert hi == pytest.approx(train.centers[-1] + 5.0 * train.stretched_width)

    def test_spacing_below_minimum_rejected(self):
        with pytest.raises(ValueError, match="spacing"):
            design_train(3, DET, spacing=3.0 * math.sqrt(2.0))

    def test_scalar_and_array_sampling_agree(self):
        schedule = build_schedule(2, DET)
        t = np.array([0.0, 1.0, 7.5])
        vec = schedule.physical(t)
        for i, ti in enumerate(t):
            scal = schedule.physical(float(ti))
            for a, b in zip(vec, scal):
                assert a[i] == b
