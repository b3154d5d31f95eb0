"""
Unit tests for the seven-mode coupled-mode solver.
"""

import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from cme import (
    FOUR_WAVE_MIXING_TERMS, MODE_INDEX, MODES, THREE_WAVE_TERMS, CmeOptions, Direction, DriveConfig,
    ModeEnvironment, ModeId, Tone, UndefinedGainError, build_environment, cme_rhs, compression_sweep,
    cross_phase_terms, degenerate_terms, integrate, mode_frequencies,
    phase_factor_3wm, phase_factor_4wm, power_to_current, propagation_signs, reflection_factors,
    signal_gain, sweep_spectrum, table_for_drive,
)
from device import DomainError, SingularityError, with_bias

GHZ = 2 * math.pi * 1e9
VELOCITY = 6.7e11

# === FIXTURES ===

def _frequencies(pa_ghz=14.5, fc_ghz=4.7, signal_ghz=7.5):
    values = mode_frequencies(pa_ghz * GHZ, fc_ghz * GHZ, signal_ghz * GHZ)
    return np.array([values[mode] for mode in MODES])

def _ideal_environment(direction=Direction.FORWARD, cells=500, epsilon=6.6e4, xi=3.0e10):
    """Dispersionless, lossless, matched environment with uniform nonlinearity."""
    omega = _frequencies()
    n = len(MODES)
    return ModeEnvironment(
        frequencies=omega,
        wavenumber=omega / VELOCITY,
        attenuation=np.zeros(n),
        impedance=np.full(n, 50.0 + 0j),
        reflection=np.zeros(n),
        transmission_factor=np.ones(n, dtype=complex),
        port_factor=np.zeros(n, dtype=complex),
        epsilon=np.full(n, epsilon),
        xi=np.full(n, xi),
        signs=propagation_signs(direction),
        cells=cells,
        direction=direction,
    )

def _state(**amplitudes):
    state = np.zeros(len(MODES), dtype=complex)
    for name, value in amplitudes.items():
        state[MODE_INDEX[ModeId(name)]] = value
    return state

def _flux(solution, env, mode):
    j = MODE_INDEX[mode]
    return np.abs(solution.y[j]) ** 2 / env.frequencies[j]

@pytest.fixture
def pumps_off_drive():
    """Both pumps disabled, weak signal at 7 GHz."""
    return DriveConfig(
        pa_pump=Tone.from_ghz(14.5, -73.4, enabled=False),
        fc_pump=Tone.from_ghz(4.7, -72.2, enabled=False),
        signal=Tone.from_ghz(7.0, -133.0),
    )

@pytest.fixture
def no_reflections():
    """3WM and 4WM with matched ports."""
    return CmeOptions(include_reflections=False)

# === MODE BASIS TESTS ===

class TestModeBasis:
    """Test cases for mode frequencies, orientation and drive conversions."""

    def test_mode_frequencies(self):
        """Test idler, converted and harmonic frequencies follow from the drives."""
        values = mode_frequencies(14.5 * GHZ, 4.7 * GHZ, 7.65 * GHZ)
        assert values[ModeId.I] / GHZ == pytest.approx(6.85)
        assert values[ModeId.D] / GHZ == pytest.approx(2.95)
        assert values[ModeId.U] / GHZ == pytest.approx(12.35)
        assert values[ModeId.C2] / GHZ == pytest.approx(9.4)

    def test_signal_must_sit_between_pumps(self):
        """Test signals below the FC pump or above the PA pump are rejected."""
        with pytest.raises(DomainError):
            mode_frequencies(14.5 * GHZ, 4.7 * GHZ, 4.0 * GHZ)
        with pytest.raises(DomainError):
            mode_frequencies(14.5 * GHZ, 4.7 * GHZ, 15.0 * GHZ)

    def test_propagation_signs(self):
        """Test the FC pump counter-propagates in the forward response and the PA pump in the backward one."""
        forward = propagation_signs(Direction.FORWARD)
        backward = propagation_signs(Direction.BACKWARD)
        assert forward[MODE_INDEX[ModeId.C]] == -1
        assert np.sum(forward < 0) == 1
        assert backward[MODE_INDEX[ModeId.A]] == -1
        assert np.sum(backward < 0) == 1

    def test_power_to_current(self):
        """Test -73.4 dBm into 50 Ohm is a 1.352 uA wave."""
        assert power_to_current(-73.4, 50.0) == pytest.approx(1.352e-6, rel=1e-3)
        with pytest.raises(ValueError):
            power_to_current(-73.4, 0.0)

    def test_disabled_tone_has_no_amplitude(self):
        """Test a disabled tone carries no current."""
        assert Tone.from_ghz(14.5, -73.4, enabled=False).amplitude(50.0) == 0.0

    def test_with_signal_keeps_pumps(self, pumps_off_drive):
        """Test with_signal only replaces the signal tone."""
        moved = pumps_off_drive.with_signal(frequency=8 * GHZ)
        assert moved.signal.frequency == pytest.approx(8 * GHZ)
        assert moved.signal.power_dbm == -133.0
        assert moved.pa_pump == pumps_off_drive.pa_pump

# === REFLECTION AND PHASE FACTOR TESTS ===

class TestReflections:
    """Test cases for port reflections and phase factors."""

    def test_matched_port(self):
        """Test Z = Z0 gives no reflection."""
        gamma, t, port = reflection_factors(50.0, 50.0, 0.1, 100)
        assert gamma == 0
        assert t == pytest.approx(1.0)
        assert port == pytest.approx(0.0)

    def test_published_mismatch(self):
        """Test 47 Ohm against 50 Ohm reflects 3/97."""
        gamma, t, port = reflection_factors(47.0, 50.0, 0.1, 100)
        assert gamma == pytest.approx(3.0 / 97.0)
        assert t == pytest.approx(1.0 / (1.0 - gamma * np.exp(20j)))
        assert port == pytest.approx(gamma * np.exp(10j))

    def test_complex_reflection_keeps_sign(self):
        """Test the complex variant keeps the phase of (Z - Z0)/(Z + Z0)."""
        gamma, _, _ = reflection_factors(47.0, 50.0, 0.1, 100, complex_reflection=True)
        assert gamma == pytest.approx(-3.0 / 97.0)

    def test_resonant_round_trip(self):
        """Test a unit round trip raises with the frequency in the message."""
        with pytest.raises(SingularityError, match="GHz"):
            reflection_factors(0.0, 50.0, 0.0, 100, frequency=7 * GHZ)

    def test_phase_matched_factor_is_unity(self):
        """Test F^{si}_a = 1 everywhere on a dispersionless matched line."""
        env = _ideal_environment()
        for x in (0.0, 13.3, 499.0):
            assert phase_factor_3wm(ModeId.S, ModeId.I, ModeId.A, env, x) == pytest.approx(1.0)

    def test_mismatched_factor(self):
        """Test an unmatched term winds as exp(i dk x)."""
        env = _ideal_environment()
        k = env.kappa
        x = 21.0
        expected = np.exp(1j * (k[MODE_INDEX[ModeId.A]] - k[MODE_INDEX[ModeId.S]] - k[MODE_INDEX[ModeId.S]]) * x)
        value = phase_factor_3wm(ModeId.A, ModeId.S, ModeId.S, env, x, conjugate=(False, True))
        assert value == pytest.approx(expected)

    def test_self_phase_factor_is_unity(self):
        """Test F^{aaa*}_a = 1 for any x."""
        env = _ideal_environment()
        value = phase_factor_4wm(ModeId.A, ModeId.A, ModeId.A, ModeId.A, env, 77.0, conjugate=(False, False, True))
        assert value == pytest.approx(1.0)

    def test_environment_without_reflections(self, small_rpm_device, pumps_off_drive, no_reflections):
        """Test disabling reflections forces Gamma = 0 and t = 1."""
        table = table_for_drive(small_rpm_device, [pumps_off_drive])
        env = build_environment(small_rpm_device, table, pumps_off_drive, no_reflections)
        assert np.all(env.reflection == 0)
        np.testing.assert_allclose(env.transmission_factor, 1.0)
        assert env.cells == 66

    def test_environment_with_reflections(self, small_rpm_device, pumps_off_drive):
        """Test reflections stay below one and the backward kappa flips a and c."""
        table = table_for_drive(small_rpm_device, [pumps_off_drive])
        forward = build_environment(small_rpm_device, table, pumps_off_drive)
        backward = build_environment(small_rpm_device, table, pumps_off_drive.with_direction(Direction.BACKWARD))
        assert np.all((forward.reflection >= 0) & (forward.reflection < 1))
        a, c = MODE_INDEX[ModeId.A], MODE_INDEX[ModeId.C]
        assert forward.kappa[c] < 0 < backward.kappa[c]
        assert backward.kappa[a] < 0 < forward.kappa[a]

# === EQUATIONS OF MOTION TESTS ===

class TestEquationsOfMotion:
    """Test cases for the coupled-mode derivative."""

    def test_three_mode_reduction(self):
        """Test a PA-only state reduces to the standard three-mode equations."""
        env = _ideal_environment()
        env = replace(env, wavenumber=env.wavenumber * np.linspace(1.0, 1.1, len(MODES)))
        k = env.wavenumber
        a, s, i = MODE_INDEX[ModeId.A], MODE_INDEX[ModeId.S], MODE_INDEX[ModeId.I]
        state = _state(a=1.2e-6 + 0.3e-6j, s=2e-9 - 1e-9j, i=0.5e-9j)
        x = 3.7
        mismatch = k[a] - k[s] - k[i]
        eps = env.epsilon[0]
        derivative = cme_rhs(x, state, env, CmeOptions(include_4wm=False))
        assert derivative[s] == pytest.approx(1j * eps * k[s] / 4 * state[a] * np.conj(state[i]) * np.exp(1j * mismatch * x))
        assert derivative[i] == pytest.approx(1j * eps * k[i] / 4 * state[a] * np.conj(state[s]) * np.exp(1j * mismatch * x))
        assert derivative[a] == pytest.approx(1j * eps * k[a] / 4 * state[s] * state[i] * np.exp(-1j * mismatch * x))
        others = [j for j in range(len(MODES)) if j not in (a, s, i)]
        np.testing.assert_allclose(derivative[others], 0.0, atol=1e-30)

    def test_self_phase_modulation(self):
        """Test a lone pump only acquires the Kerr phase i xi k |I|^2 I / 8."""
        env = _ideal_environment(epsilon=0.0)
        a = MODE_INDEX[ModeId.A]
        state = _state(a=1.5e-6)
        derivative = cme_rhs(10.0, state, env, CmeOptions())
        expected = 1j * env.xi[a] * env.wavenumber[a] * abs(state[a]) ** 2 * state[a] / 8
        assert derivative[a] == pytest.approx(expected)
        assert np.real(np.conj(state[a]) * derivative[a]) == pytest.approx(0.0, abs=1e-30)

    def test_attenuation_damps_forward_modes(self):
        """Test loss enters as -sigma alpha I."""
        base = _ideal_environment(epsilon=0.0)
        env = replace(base, attenuation=np.full(len(MODES), 1e-3))
        state = _state(s=1e-9, c=1e-6)
        derivative = cme_rhs(0.0, state, env, CmeOptions(include_4wm=False))
        s, c = MODE_INDEX[ModeId.S], MODE_INDEX[ModeId.C]
        assert derivative[s] == pytest.approx(-1e-3 * state[s])
        assert derivative[c] == pytest.approx(1e-3 * state[c])

# === MIXING TABLE TESTS ===

def _term_sum(env, x, state, terms, coefficient):
    """The listed terms written out one product at a time on a matched line."""
    kappa = env.kappa
    out = np.zeros(len(MODES), dtype=complex)
    for target, weight, partners in terms:
        product = complex(weight)
        for mode, conj in partners:
            j = MODE_INDEX[mode]
            value = np.exp(1j * kappa[j] * x) * state[j]
            product *= np.conj(value) if conj else value
        t = MODE_INDEX[target]
        out[t] += 1j * coefficient[t] * product / np.exp(1j * kappa[t] * x)
    return out

def _partner_state(partners):
    """Distinct complex amplitudes on the partner modes only."""
    state = np.zeros(len(MODES), dtype=complex)
    for mode, _ in partners:
        j = MODE_INDEX[mode]
        state[j] = (1.0 + 0.1 * j) * 1e-6 * np.exp(0.7j * (j + 1))
    return state

def _term_id(term):
    target, _, partners = term
    return target.value + "<" + "".join(mode.value + ("*" if conj else "") for mode, conj in partners)

def _dispersive_environment(epsilon=6.6e4, xi=3.0e10):
    env = _ideal_environment(epsilon=epsilon, xi=xi)
    return replace(env, wavenumber=env.wavenumber * np.linspace(1.0, 1.1, len(MODES)))

class TestMixingTables:
    """Test cases activating the mixing terms one partner set at a time."""

    def test_table_sizes(self):
        """Test the three- and four-wave tables hold every coupling once."""
        assert len(THREE_WAVE_TERMS) == 14
        assert len({(target, partners) for target, _, partners in THREE_WAVE_TERMS}) == 14
        assert len({frozenset(mode for mode, _ in partners) for _, _, partners in THREE_WAVE_TERMS}) == 13
        assert len(FOUR_WAVE_MIXING_TERMS) == 19
        assert len({(target, partners) for target, _, partners in FOUR_WAVE_MIXING_TERMS}) == 19
        assert len(cross_phase_terms()) == len(MODES) ** 2

    @pytest.mark.parametrize("term", THREE_WAVE_TERMS, ids=_term_id)
    def test_three_wave_term(self, term):
        """Test each three-wave term enters dI/dx as i eps k w F I I / 4."""
        target, _, partners = term
        env = _dispersive_environment()
        x = 3.7
        state = _partner_state(partners)
        coefficient = env.epsilon * env.kappa / 4.0
        derivative = cme_rhs(x, state, env, CmeOptions(include_4wm=False))
        alone = _term_sum(env, x, state, [term], coefficient)
        others = _term_sum(env, x, state, [t for t in THREE_WAVE_TERMS if t is not term], coefficient)
        t = MODE_INDEX[target]
        assert abs(alone[t]) > 0
        assert derivative[t] - others[t] == pytest.approx(alone[t], rel=1e-10)
        np.testing.assert_allclose(derivative, alone + others, rtol=1e-10, atol=1e-12 * np.max(np.abs(derivative)))

    @pytest.mark.parametrize("term", FOUR_WAVE_MIXING_TERMS, ids=_term_id)
    def test_four_wave_term(self, term):
        """Test each four-wave term enters dI/dx as i xi k w F I I I / 8 next to the Kerr terms."""
        target, _, partners = term
        env = _dispersive_environment(epsilon=0.0)
        x = 3.7
        state = _partner_state(partners)
        coefficient = env.xi * env.kappa / 8.0
        derivative = cme_rhs(x, state, env, CmeOptions())
        alone = _term_sum(env, x, state, [term], coefficient)
        others = _term_sum(env, x, state, [t for t in FOUR_WAVE_MIXING_TERMS if t is not term]
                           + list(cross_phase_terms()), coefficient)
        t = MODE_INDEX[target]
        assert abs(alone[t]) > 0
        assert derivative[t] - others[t] == pytest.approx(alone[t], rel=1e-9)
        np.testing.assert_allclose(derivative, alone + others, rtol=1e-10, atol=1e-12 * np.max(np.abs(derivative)))

    def test_four_wave_switch(self):
        """Test include_4wm=False removes every xi contribution."""
        env = _dispersive_environment(epsilon=0.0)
        state = _partner_state([(mode, False) for mode in MODES])
        np.testing.assert_allclose(cme_rhs(1.0, state, env, CmeOptions(include_4wm=False)), 0.0, atol=1e-30)

    def test_degenerate_tables(self):
        """Test the merged basis renames the idler and reweights coinciding products."""
        three_wave = degenerate_terms(THREE_WAVE_TERMS)
        assert all(target != ModeId.I and all(mode != ModeId.I for mode, _ in partners)
                   for target, _, partners in three_wave)
        weights = {(target, partners): weight for target, weight, partners in three_wave}
        assert weights[(ModeId.S, ((ModeId.A, False), (ModeId.S, True)))] == 1.0
        assert weights[(ModeId.A, ((ModeId.S, False), (ModeId.S, False)))] == 0.5
        assert weights[(ModeId.C2, ((ModeId.C, False), (ModeId.C, False)))] == 0.5
        assert len(three_wave) == len(THREE_WAVE_TERMS) - 1
        four_wave = degenerate_terms(FOUR_WAVE_MIXING_TERMS + cross_phase_terms())
        kerr = {(target, partners): weight for target, weight, partners in four_wave}
        assert kerr[(ModeId.S, ((ModeId.S, False), (ModeId.S, False), (ModeId.S, True)))] == 1.0
        assert kerr[(ModeId.A, ((ModeId.A, False), (ModeId.S, False), (ModeId.S, True)))] == 2.0
        assert kerr[(ModeId.S, ((ModeId.A, False), (ModeId.C, False), (ModeId.U, True)))] == 2.0

# === CONSERVATION TESTS ===

class TestManleyRowe:
    """Test cases for photon-flux conservation of the lossless equations."""

    def _integrate(self, env, start):
        return solve_ivp(cme_rhs, (0.0, float(env.cells)), start, method="DOP853",
                         args=(env, CmeOptions(include_4wm=False)), rtol=1e-11, atol=1e-22)

    def test_amplification_triplet(self):
        """Test |I_s|^2/w_s - |I_i|^2/w_i stays constant while the signal grows."""
        env = _ideal_environment()
        solution = self._integrate(env, _state(a=1.3e-6, s=1e-8))
        assert solution.success
        invariant = _flux(solution, env, ModeId.S) - _flux(solution, env, ModeId.I)
        scale = np.max(_flux(solution, env, ModeId.S))
        np.testing.assert_allclose(invariant, invariant[0], atol=1e-6 * scale)
        assert abs(solution.y[MODE_INDEX[ModeId.S], -1]) > 1e-8

    def test_conversion_family(self):
        """Test the signal, down- and up-converted fluxes trade without loss."""
        env = _ideal_environment(Direction.BACKWARD)
        solution = self._integrate(env, _state(c=1.3e-6, s=1e-8))
        assert solution.success
        total = sum(_flux(solution, env, mode) for mode in (ModeId.S, ModeId.D, ModeId.U))
        np.testing.assert_allclose(total, total[0], rtol=1e-6)
        assert np.max(_flux(solution, env, ModeId.D)) > 1e-3 * total[0]

# === SYMMETRY TESTS ===

class TestSignalPhase:
    """Test cases for the signal input phase and the degenerate point."""

    def _gain(self, env, start, options):
        solution = solve_ivp(cme_rhs, (0.0, float(env.cells)), start, method="DOP853",
                             args=(env, options), rtol=1e-12, atol=1e-24)
        assert solution.success
        s = MODE_INDEX[ModeId.S]
        return abs(solution.y[s, -1] / solution.y[s, 0]) ** 2

    @pytest.mark.parametrize("direction", [Direction.FORWARD, Direction.BACKWARD])
    def test_gain_ignores_signal_phase(self, direction):
        """Test rotating the input signal by exp(i theta) leaves |G_s| unchanged."""
        env = _dispersive_environment()
        env = replace(env, cells=200, signs=propagation_signs(direction), direction=direction)
        options = CmeOptions()
        reference = self._gain(env, _state(a=1.3e-6, c=1.2e-6, s=1e-8), options)
        for theta in (0.4, 2.0, -2.9):
            rotated = self._gain(env, _state(a=1.3e-6, c=1.2e-6, s=1e-8 * np.exp(1j * theta)), options)
            assert rotated == pytest.approx(reference, rel=1e-9)

    def test_degenerate_gain_differs_from_split_modes(self):
        """Test the merged signal grows as cosh(2gx) where separate signal and idler give cosh^2(gx)."""
        omega = _frequencies(pa_ghz=14.0, signal_ghz=7.0)
        split = replace(_ideal_environment(cells=300), frequencies=omega, wavenumber=omega / VELOCITY)
        merged = replace(split, degenerate=True)
        options = CmeOptions(include_4wm=False)
        start = _state(a=1.3e-6, s=1e-8)
        a, s, i = MODE_INDEX[ModeId.A], MODE_INDEX[ModeId.S], MODE_INDEX[ModeId.I]

        derivative = cme_rhs(0.0, start, merged, options)
        coupling = merged.epsilon[s] * merged.wavenumber[s] / 4
        assert derivative[s] == pytest.approx(1j * coupling * start[a] * np.conj(start[s]))
        assert derivative[i] == 0
        assert derivative[a] == pytest.approx(1j * merged.epsilon[a] * merged.wavenumber[a] / 8 * start[s] ** 2)
        assert cme_rhs(0.0, start, split, options)[s] == 0

        gx = coupling * start[a].real * split.cells
        assert self._gain(split, start, options) == pytest.approx(math.cosh(gx) ** 2, rel=1e-3)
        assert self._gain(merged, start, options) == pytest.approx(math.cosh(2 * gx), rel=1e-3)

# === INTEGRATION TESTS ===

class TestIntegration:
    """Test cases for whole-line integration and gain."""

    def test_free_propagation(self, plain_device, pumps_off_drive, no_reflections):
        """Test a lossless matched line leaves the signal magnitude unchanged."""
        solution = integrate(plain_device, pumps_off_drive, no_reflections)
        signal = solution.amplitude(ModeId.S)
        assert abs(signal[-1]) == pytest.approx(abs(signal[0]), rel=1e-9)
        assert signal_gain(solution) == pytest.approx(1.0, rel=1e-9)
        assert solution.positions[-1] == pytest.approx(plain_device.total_cells)

    def test_pumps_off_is_reciprocal(self, small_rpm_device, pumps_off_drive, no_reflections):
        """Test forward and backward transmissions agree with both pumps off and never exceed 0 dB."""
        table = table_for_drive(small_rpm_device, [pumps_off_drive])
        frequencies = np.array([6.0, 7.0, 8.0]) * GHZ
        forward = sweep_spectrum(small_rpm_device, pumps_off_drive, frequencies, Direction.FORWARD,
                                 no_reflections, table)
        backward = sweep_spectrum(small_rpm_device, pumps_off_drive, frequencies, Direction.BACKWARD,
                                  no_reflections, table)
        np.testing.assert_allclose(forward.gain_db, backward.gain_db, atol=1e-9)
        assert np.all(forward.gain_db < 0.0)
        assert backward.direction == Direction.BACKWARD

    def test_undefined_gain(self, plain_device, pumps_off_drive, no_reflections):
        """Test the gain of a disabled signal is undefined."""
        drive = pumps_off_drive.model_copy(update={"signal": Tone.from_ghz(7.0, -133.0, enabled=False)})
        solution = integrate(plain_device, drive, no_reflections)
        with pytest.raises(UndefinedGainError):
            signal_gain(solution)
        with pytest.raises(UndefinedGainError):
            solution.mode_gains()

    def test_failed_point_does_not_stop_sweep(self, plain_device, pumps_off_drive, no_reflections):
        """Test a signal below the FC pump is recorded as a failure while the sweep continues."""
        result = sweep_spectrum(plain_device, pumps_off_drive, np.array([3.0, 7.0]) * GHZ,
                                options=no_reflections)
        assert 0 in result.failures
        assert math.isnan(result.gain_db[0])
        assert result.gain_db[1] == pytest.approx(0.0, abs=1e-6)
        records = result.to_records()
        assert records[1]["freq_GHz"] == pytest.approx(7.0)
        assert "p_c2_dbm" in records[1]

    def test_degenerate_point_flagged(self, plain_device, no_reflections):
        """Test a signal at half the PA pump is flagged degenerate."""
        drive = DriveConfig(
            pa_pump=Tone.from_ghz(14.0, -90.0),
            fc_pump=Tone.from_ghz(4.7, -90.0, enabled=False),
            signal=Tone.from_ghz(7.0, -140.0),
        )
        device = with_bias(plain_device, 1.5e-6)
        solution = integrate(device, drive, no_reflections)
        assert solution.degenerate
        assert solution.environment.degenerate
        np.testing.assert_allclose(solution.amplitude(ModeId.I), 0.0, atol=0.0)
        result = sweep_spectrum(device, drive, np.array([6.5, 7.0]) * GHZ, options=no_reflections)
        assert [record["degenerate"] for record in result.to_records()] == [False, True]

    def test_compression_without_pumps(self, plain_device, pumps_off_drive, no_reflections):
        """Test an unpumped line never compresses."""
        result = compression_sweep(plain_device, pumps_off_drive, [-130.0, -140.0, -120.0], no_reflections)
        assert result.input_power_dbm.tolist() == [-140.0, -130.0, -120.0]
        assert result.small_signal_gain_db == pytest.approx(0.0, abs=1e-6)
        assert result.input_p1db_dbm is None
        with pytest.raises(ValueError):
            compression_sweep(plain_device, pumps_off_drive, [-130.0])

# === PUBLISHED OPERATING POINTS ===

@pytest.mark.slow
@pytest.mark.reproduction
class TestPublishedSpectra:
    """Test cases comparing against the published three-wave design spectra."""

    def test_forward_gain_with_backward_isolation(self, design_device):
        """Test forward gain and backward isolation around 7 GHz at the design point."""
        drive = DriveConfig(
            pa_pump=Tone.from_ghz(14.27, -73.0),
            fc_pump=Tone.from_ghz(4.7, -73.0),
            signal=Tone.from_ghz(7.0, -133.0),
        )
        options = CmeOptions(include_4wm=False)
        frequencies = np.arange(6.0, 8.01, 0.25) * GHZ
        forward = sweep_spectrum(design_device, drive, frequencies, Direction.FORWARD, options)
        backward = sweep_spectrum(design_device, drive, frequencies, Direction.BACKWARD, options)
        assert np.nanmax(forward.gain_db) > 10.0
        assert np.nanmin(backward.gain_db) < -5.0
