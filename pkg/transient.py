"""
Time-domain simulation of the Josephson ladder.

The network is written in node phases (voltage = PHI0 dphi/dt) and solved
with a fixed-step trapezoidal rule, one Newton iteration loop per step on a
banded Jacobian. Each cell contributes one main node; rpm cells add the node
between the coupling capacitor and the tank. Nodes are ordered along the
line so every branch spans at most two indices.

Terminations are resistors to ground at both end nodes, driven by Norton
current sources carrying the pumps, the signal and the dc bias. S-parameters
are extracted from the terminal waveforms over an analysis window holding an
integer number of periods of every drive.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import partial, reduce
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.linalg import solve_banded
from scipy.signal import find_peaks

from cme import Direction, DriveConfig
from device import PHI0, DeviceSpec, NumericalError, build_cell_array, phase_velocity
from sweeps import run_points

logger = logging.getLogger(__name__)

SIGNAL_SOURCE_AMPLITUDE = 0.05e-6
SAMPLES_PER_PERIOD = 64
FREQUENCY_RESOLUTION_HZ = 1e3
MAX_ANALYSIS_WINDOW = 200e-9
BANDS = 2

# === ERRORS ===

class NewtonConvergenceError(NumericalError):
    """Raised when the Newton iteration of a time step does not converge."""
    pass

class InstabilityError(NumericalError):
    """Raised when node phase rates grow without bound."""
    pass

class LeakageError(NumericalError):
    """Raised when a frequency does not fall on the analysis-window grid."""
    pass

# === DATA MODELS ===

class Port(str, Enum):
    """Terminal of the line."""
    INPUT = "input"
    OUTPUT = "output"

class DriveSource(BaseModel):
    """Sinusoidal Norton current source at one port."""

    model_config = ConfigDict(frozen=True)

    port: Port
    frequency: float = Field(..., gt=0, description="Angular frequency (rad/s)")
    amplitude: float = Field(..., ge=0, description="Norton current amplitude (A)")
    phase: float = 0.0
    label: str = ""

class TransientConfig(BaseModel):
    """Time grid, drives and terminations of one transient run."""

    model_config = ConfigDict(frozen=True)

    time_step: float = Field(..., gt=0, description="Fixed time step (s)")
    duration: float = Field(..., gt=0, description="Total simulated time (s)")
    settle: float = Field(0.0, ge=0, description="Time discarded before the analysis window (s)")
    drives: Tuple[DriveSource, ...] = ()
    termination_resistance: float = Field(50.0, gt=0, description="Port resistors to ground (Ohm)")
    bias_current: float = Field(0.0, description="dc current from the input to the output port (A)")
    ramp_duration: float = Field(0.0, ge=0, description="Raised-cosine turn-on of every source (s)")
    signal_frequency: Optional[float] = Field(None, gt=0, description="Analyzed tone (rad/s)")
    signal_port: Port = Port.INPUT
    newton_tolerance: float = Field(1e-12, gt=0)
    max_newton_iterations: int = Field(50, ge=1)

    @model_validator(mode="after")
    def validate_grid(self) -> "TransientConfig":
        """Check time resolution and window commensurability."""
        if self.settle >= self.duration:
            raise ValueError(f"settle {self.settle:.4g} s must be shorter than duration {self.duration:.4g} s")
        if self.drives:
            fastest = max(source.frequency for source in self.drives)
            if self.time_step > 2 * math.pi / (SAMPLES_PER_PERIOD * fastest) * (1 + 1e-9):
                raise ValueError(
                    f"time step {self.time_step:.4g} s gives fewer than {SAMPLES_PER_PERIOD} "
                    f"samples per period at {fastest / (2 * math.pi) / 1e9:.4f} GHz"
                )
        steps = self.window / self.time_step
        if abs(steps - round(steps)) > 1e-6 * max(1.0, steps):
            raise ValueError("analysis window must hold an integer number of time steps")
        if self.signal_frequency is not None:
            periods = self.window * self.signal_frequency / (2 * math.pi)
            if abs(periods - round(periods)) > 1e-6 * max(1.0, periods):
                raise ValueError("analysis window must hold an integer number of signal periods")
        return self

    @property
    def window(self) -> float:
        return self.duration - self.settle

    @property
    def total_steps(self) -> int:
        return int(round(self.duration / self.time_step))

    @property
    def settle_steps(self) -> int:
        return int(round(self.settle / self.time_step))

@dataclass
class NetworkState:
    """Node phases and their rates at one instant."""
    phases: np.ndarray
    rates: np.ndarray
    time: float = 0.0

@dataclass
class LadderNetwork:
    """Banded nodal description of the ladder."""
    main_nodes: np.ndarray
    rpm_nodes: np.ndarray
    capacitance: np.ndarray
    conductance: np.ndarray
    critical_current: float
    rpm_inductance: float
    plasma_frequency: float
    drives: Tuple[DriveSource, ...]
    bias_current: float
    termination_resistance: float
    ramp_duration: float

    @property
    def size(self) -> int:
        return int(self.conductance.size)

    @property
    def junction_count(self) -> int:
        return int(self.main_nodes.size - 1)

    def junction_phases(self, phases: np.ndarray) -> np.ndarray:
        """Gauge-invariant phase across every junction."""
        return phases[self.main_nodes[:-1]] - phases[self.main_nodes[1:]]

    def branch_currents(self, phases: np.ndarray) -> np.ndarray:
        """Nonlinear currents leaving every node through junctions and tank inductors."""
        current = self.critical_current * np.sin(self.junction_phases(phases))
        out = np.zeros(self.size)
        out[self.main_nodes[:-1]] += current
        out[self.main_nodes[1:]] -= current
        if self.rpm_nodes.size:
            out[self.rpm_nodes] += PHI0 * phases[self.rpm_nodes] / self.rpm_inductance
        return out

    def add_stiffness(self, bands: np.ndarray, phases: np.ndarray, scale: float) -> None:
        """Add scale times the junction Jacobian to banded storage."""
        left, right = self.main_nodes[:-1], self.main_nodes[1:]
        g = scale * self.critical_current * np.cos(self.junction_phases(phases))
        bands[BANDS, left] += g
        bands[BANDS, right] += g
        bands[BANDS + left - right, right] -= g
        bands[BANDS + right - left, left] -= g

    def source_currents(self, times: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Currents injected at the input and output nodes."""
        envelope = _ramp(times, self.ramp_duration)
        injected = {Port.INPUT: np.full(times.shape, self.bias_current),
                    Port.OUTPUT: np.full(times.shape, -self.bias_current)}
        for source in self.drives:
            injected[source.port] = injected[source.port] + source.amplitude * np.cos(
                source.frequency * times + source.phase)
        return envelope * injected[Port.INPUT], envelope * injected[Port.OUTPUT]

@dataclass
class TransientResult:
    """Terminal waveforms over the analysis window."""
    times: np.ndarray
    v_in: np.ndarray
    i_in: np.ndarray
    v_out: np.ndarray
    i_out: np.ndarray
    config: TransientConfig
    final_state: Optional[NetworkState] = None
    s21: Dict[float, complex] = field(default_factory=dict)

    @property
    def sample_count(self) -> int:
        return int(self.times.size)

    @property
    def window(self) -> float:
        return self.sample_count * self.config.time_step

@dataclass(frozen=True)
class SpectralPeak:
    frequency: float
    power_dbm: float
    label: str = ""

@dataclass
class OutputSpectrum:
    """Power leaving the output port per frequency bin."""
    frequencies: np.ndarray
    power_dbm: np.ndarray
    peaks: List[SpectralPeak] = field(default_factory=list)

    def as_pairs(self) -> List[Tuple[float, float]]:
        return list(zip(self.frequencies.tolist(), self.power_dbm.tolist()))

    def to_records(self) -> List[dict]:
        labels = {peak.frequency: peak.label for peak in self.peaks}
        return [
            {"freq_GHz": omega / (2 * math.pi) / 1e9, "power_dbm": power, "tone": labels.get(omega, "")}
            for omega, power in zip(self.frequencies, self.power_dbm)
        ]

@dataclass
class TransientSpectrum:
    """Forward and backward transmission over a signal sweep."""
    frequencies: np.ndarray
    s21_forward: np.ndarray
    s21_backward: np.ndarray
    failures: Dict[Tuple[int, str], str] = field(default_factory=dict)

    def to_records(self) -> List[dict]:
        with np.errstate(divide="ignore", invalid="ignore"):
            forward = 20.0 * np.log10(np.abs(self.s21_forward))
            backward = 20.0 * np.log10(np.abs(self.s21_backward))
        return [
            {"freq_GHz": omega / (2 * math.pi) / 1e9, "s21_fwd_db": fwd, "s21_bwd_db": bwd}
            for omega, fwd, bwd in zip(self.frequencies, forward, backward)
        ]

# === NETWORK ===

def _ramp(times: np.ndarray, duration: float) -> np.ndarray:
    if duration <= 0:
        return np.ones(times.shape)
    progress = np.clip(times / duration, 0.0, 1.0)
    return 0.5 * (1.0 - np.cos(np.pi * progress))

def _add_banded(bands: np.ndarray, rows: np.ndarray, cols: np.ndarray, values) -> None:
    np.add.at(bands, (BANDS + rows - cols, cols), values)

def _banded_matvec(bands: np.ndarray, vector: np.ndarray) -> np.ndarray:
    size = vector.size
    out = np.zeros(size)
    for row in range(2 * BANDS + 1):
        offset = row - BANDS
        lo, hi = max(0, -offset), min(size, size - offset)
        if hi > lo:
            out[lo + offset:hi + offset] += bands[row, lo:hi] * vector[lo:hi]
    return out

def build_network(device: DeviceSpec, config: TransientConfig) -> Tuple[LadderNetwork, NetworkState]:
    """
    Nodal equations of the ladder and its rest state.

    Junction j joins main nodes j and j+1 (ideal sin current-phase relation
    in parallel with C_J); the shunt branch of cell j hangs from main node
    j+1 through its coupling capacitor, in series with the rpm tank on tank
    cells. The line is lossless apart from the port resistors.

    Args:
        device: Device description; loss tangent is ignored
        config: Drives, bias and terminations

    Returns:
        Tuple of (LadderNetwork, NetworkState at rest)
    """
    profile = build_cell_array(device)
    cells = profile.cell_count
    if cells == 0:
        raise ValueError("transient simulation needs at least one cell")
    main = np.zeros(cells + 1, dtype=int)
    rpm_nodes, rpm_cells = [], []
    index = 1
    for j in range(cells):
        main[j + 1] = index
        index += 1
        if profile.rpm_mask[j]:
            rpm_nodes.append(index)
            rpm_cells.append(j)
            index += 1
    size = index
    rpm_nodes = np.array(rpm_nodes, dtype=int)
    rpm_cells = np.array(rpm_cells, dtype=int)

    cj = device.junction.junction_capacitance
    bands = np.zeros((2 * BANDS + 1, size))
    left, right = main[:-1], main[1:]
    _add_banded(bands, left, left, cj)
    _add_banded(bands, right, right, cj)
    _add_banded(bands, left, right, -cj)
    _add_banded(bands, right, left, -cj)

    coupling = profile.ground_capacitance
    plain = ~profile.rpm_mask
    _add_banded(bands, main[1:][plain], main[1:][plain], coupling[plain])
    if rpm_nodes.size:
        attach = main[rpm_cells + 1]
        cc = coupling[rpm_cells]
        _add_banded(bands, attach, attach, cc)
        _add_banded(bands, rpm_nodes, rpm_nodes, cc + device.rpm.capacitance)
        _add_banded(bands, attach, rpm_nodes, -cc)
        _add_banded(bands, rpm_nodes, attach, -cc)

    conductance = np.zeros(size)
    conductance[main[0]] += 1.0 / config.termination_resistance
    conductance[main[-1]] += 1.0 / config.termination_resistance

    network = LadderNetwork(
        main_nodes=main, rpm_nodes=rpm_nodes, capacitance=bands, conductance=conductance,
        critical_current=device.junction.critical_current,
        rpm_inductance=device.rpm.inductance if device.rpm is not None else math.inf,
        plasma_frequency=device.junction.plasma_angular_frequency,
        drives=tuple(config.drives), bias_current=config.bias_current,
        termination_resistance=config.termination_resistance, ramp_duration=config.ramp_duration,
    )
    logger.info(f"Ladder network: {cells} junctions, {rpm_nodes.size} rpm tanks, {size} nodes")
    return network, NetworkState(np.zeros(size), np.zeros(size))

# === INTEGRATION ===

def _rate_limit(network: LadderNetwork) -> float:
    fastest = max([source.frequency for source in network.drives] + [network.plasma_frequency])
    return 1e3 * fastest

def integrate_transient(network: LadderNetwork, config: TransientConfig,
                        state: Optional[NetworkState] = None) -> TransientResult:
    """
    Trapezoidal integration with Newton iterations at every step.

    Args:
        network: Ladder built by build_network
        config: Time grid and analysis settings
        state: Initial state; defaults to rest

    Returns:
        TransientResult holding the terminal waveforms after the settle time
    """
    h = config.time_step
    size = network.size
    phases = np.zeros(size) if state is None else state.phases.copy()
    rates = np.zeros(size) if state is None else state.rates.copy()
    start = 0.0 if state is None else state.time
    steps, settle_steps = config.total_steps, config.settle_steps
    times = start + h * np.arange(steps + 1)
    source_in, source_out = network.source_currents(times - start)
    node_in, node_out = network.main_nodes[0], network.main_nodes[-1]

    base = (2.0 * PHI0 / h ** 2) * network.capacitance
    base[BANDS] += (PHI0 / h) * network.conductance
    if network.rpm_nodes.size:
        base[BANDS, network.rpm_nodes] += 0.5 * PHI0 / network.rpm_inductance
    limit = _rate_limit(network)

    def sources(j: int) -> np.ndarray:
        vector = np.zeros(size)
        vector[node_in] += source_in[j]
        vector[node_out] += source_out[j]
        return vector

    def residual_current(p: np.ndarray, u: np.ndarray, j: int) -> np.ndarray:
        return sources(j) - PHI0 * network.conductance * u - network.branch_currents(p)

    samples = steps - settle_steps
    record = np.empty((4, samples))
    current = residual_current(phases, rates, 0)
    tolerance = config.newton_tolerance
    for n in range(steps):
        guess = phases + h * rates
        for _ in range(config.max_newton_iterations):
            next_rates = 2.0 * (guess - phases) / h - rates
            next_current = residual_current(guess, next_rates, n + 1)
            residual = PHI0 * _banded_matvec(network.capacitance, next_rates - rates) / h \
                - 0.5 * (current + next_current)
            jacobian = base.copy()
            network.add_stiffness(jacobian, guess, 0.5)
            delta = solve_banded((BANDS, BANDS), jacobian, -residual, check_finite=False)
            guess = guess + delta
            if np.max(np.abs(delta)) <= tolerance * max(1.0, float(np.max(np.abs(guess)))):
                break
        else:
            raise NewtonConvergenceError(f"Newton iteration did not converge at t = {times[n + 1]:.6e} s")
        rates = 2.0 * (guess - phases) / h - rates
        phases = guess
        current = residual_current(phases, rates, n + 1)
        if not np.all(np.isfinite(rates)) or np.max(np.abs(rates)) > limit:
            raise InstabilityError(f"Node phase rate exceeded {limit:.3e} rad/s at t = {times[n + 1]:.6e} s")

        k = n - settle_steps
        if 0 <= k < samples:
            v_in, v_out = PHI0 * rates[node_in], PHI0 * rates[node_out]
            i_in = source_in[n + 1] - v_in / network.termination_resistance
            i_out = v_out / network.termination_resistance - source_out[n + 1]
            if config.signal_port == Port.OUTPUT:
                record[:, k] = (v_out, -i_out, v_in, -i_in)
            else:
                record[:, k] = (v_in, i_in, v_out, i_out)

    recorded_times = times[settle_steps + 1:settle_steps + 1 + samples]
    return TransientResult(recorded_times, record[0], record[1], record[2], record[3], config,
                           NetworkState(phases, rates, float(times[-1])))

# === SPECTRAL ANALYSIS ===

def _fourier_coefficient(result: TransientResult, waveform: np.ndarray, omega: float) -> complex:
    periods = omega * result.window / (2 * math.pi)
    if abs(periods - round(periods)) > 1e-6:
        raise LeakageError(
            f"{omega / (2 * math.pi) / 1e9:.6f} GHz is not commensurate with the "
            f"{result.window:.6e} s analysis window"
        )
    if round(periods) >= result.sample_count / 2:
        raise LeakageError(f"{omega / (2 * math.pi) / 1e9:.6f} GHz is above the Nyquist frequency")
    return complex(2.0 / result.sample_count * np.dot(waveform, np.exp(-1j * omega * result.times)))

def extract_s21(result: TransientResult, omega_s: float, z0: Optional[float] = None) -> complex:
    """
    Transmission (V_out + Z0 I_out) / (V_in + Z0 I_in) at omega_s.

    Args:
        result: Transient waveforms
        omega_s: Analyzed angular frequency; must be commensurate with the window
        z0: Reference impedance; defaults to the termination resistance

    Returns:
        Complex S21 (stored on the result as well)
    """
    z0 = result.config.termination_resistance if z0 is None else z0
    outgoing = _fourier_coefficient(result, result.v_out, omega_s) + z0 * _fourier_coefficient(result, result.i_out, omega_s)
    incoming = _fourier_coefficient(result, result.v_in, omega_s) + z0 * _fourier_coefficient(result, result.i_in, omega_s)
    if incoming == 0:
        raise LeakageError(f"No incident wave at {omega_s / (2 * math.pi) / 1e9:.6f} GHz")
    s21 = outgoing / incoming
    result.s21[float(omega_s)] = s21
    return s21

def extract_s11(result: TransientResult, omega_s: float, z0: Optional[float] = None) -> complex:
    """Reflection (V_in - Z0 I_in) / (V_in + Z0 I_in) at the signal port."""
    z0 = result.config.termination_resistance if z0 is None else z0
    voltage = _fourier_coefficient(result, result.v_in, omega_s)
    current = _fourier_coefficient(result, result.i_in, omega_s)
    if voltage + z0 * current == 0:
        raise LeakageError(f"No incident wave at {omega_s / (2 * math.pi) / 1e9:.6f} GHz")
    return (voltage - z0 * current) / (voltage + z0 * current)

def gain_db(s21: complex) -> float:
    """10 log10 |S21|^2."""
    return 10.0 * math.log10(max(abs(s21) ** 2, 1e-30))

def expected_tones(drive: DriveConfig) -> Dict[str, float]:
    """Frequencies of the main output tones of a two-pump drive."""
    omega_a, omega_c, omega_s = drive.pa_pump.frequency, drive.fc_pump.frequency, drive.signal.frequency
    tones = {"c": omega_c, "c2": 2.0 * omega_c, "s": omega_s, "i": omega_a - omega_s,
             "a-2c": omega_a - 2.0 * omega_c}
    return {label: omega for label, omega in tones.items() if omega > 0}

def output_spectrum(result: TransientResult, z0: Optional[float] = None,
                    tones: Optional[Dict[str, float]] = None, prominence_db: float = 10.0) -> OutputSpectrum:
    """
    Power of the wave leaving the output port on the window's frequency grid.

    Args:
        result: Transient waveforms
        z0: Reference impedance; defaults to the termination resistance
        tones: Labelled angular frequencies used to annotate peaks
        prominence_db: Peak prominence required by the peak finder

    Returns:
        OutputSpectrum in dBm with annotated peaks
    """
    z0 = result.config.termination_resistance if z0 is None else z0
    outgoing = 0.5 * (result.v_out + z0 * result.i_out)
    count = result.sample_count
    amplitude = np.abs(np.fft.rfft(outgoing)) * 2.0 / count
    amplitude[0] *= 0.5
    watts = amplitude ** 2 / (2.0 * z0)
    power = 10.0 * np.log10(np.maximum(watts, 1e-30)) + 30.0
    frequencies = 2 * math.pi * np.fft.rfftfreq(count, result.config.time_step)

    spacing = frequencies[1] - frequencies[0] if frequencies.size > 1 else math.inf
    indices, _ = find_peaks(power, prominence=prominence_db)
    peaks = []
    for j in indices:
        label = ""
        for name, omega in (tones or {}).items():
            if abs(frequencies[j] - omega) <= 0.5 * spacing:
                label = name
                break
        peaks.append(SpectralPeak(float(frequencies[j]), float(power[j]), label))
    return OutputSpectrum(frequencies, power, peaks)

# === PLANNING AND SWEEPS ===

def _commensurate_base(frequencies_hz: Sequence[float], resolution_hz: float) -> float:
    multiples = []
    for value in frequencies_hz:
        ratio = value / resolution_hz
        if abs(ratio - round(ratio)) > 1e-3:
            raise LeakageError(f"{value / 1e9:.9f} GHz is not a multiple of {resolution_hz:.0f} Hz")
        multiples.append(int(round(ratio)))
    return reduce(math.gcd, multiples) * resolution_hz

def plan_transient(device: DeviceSpec, drives: Sequence[DriveSource], signal_frequency: float,
                   signal_port: Port = Port.INPUT, bias_current: Optional[float] = None,
                   samples_per_period: int = SAMPLES_PER_PERIOD, settle_periods: float = 20.0,
                   settle_transits: float = 5.0, ramp_transits: float = 2.0,
                   min_window_periods: float = 10.0,
                   max_window: float = MAX_ANALYSIS_WINDOW,
                   resolution_hz: float = FREQUENCY_RESOLUTION_HZ) -> TransientConfig:
    """
    Time grid for a run analyzed at signal_frequency.

    The analysis window is a whole number of periods of the greatest common
    divisor of the drive frequencies. The settle time is the longer of
    settle_periods signal periods and settle_transits line transits; sources
    turn on over ramp_transits transits (at least two periods of the slowest
    drive).

    Args:
        device: Device description
        drives: Sources applied during the run
        signal_frequency: Analyzed angular frequency (rad/s)
        signal_port: Port at which the signal enters
        bias_current: dc bias; defaults to device.bias
        samples_per_period: Minimum samples per period of the fastest drive
        settle_periods: Settle time in signal periods
        settle_transits: Settle time in line transit times
        ramp_transits: Source turn-on in line transit times
        min_window_periods: Minimum analysis window in signal periods
        max_window: Longest analysis window (s)
        resolution_hz: Grid every drive frequency must fall on

    Returns:
        Validated TransientConfig
    """
    if signal_frequency <= 0:
        raise ValueError("signal frequency must be positive")
    drive_hz = [source.frequency / (2 * math.pi) for source in drives]
    signal_hz = signal_frequency / (2 * math.pi)
    base = _commensurate_base(drive_hz + [signal_hz], resolution_hz)
    if 1.0 / base > max_window:
        raise LeakageError(
            f"Drive frequencies share a {base:.0f} Hz grid; the shortest commensurate window "
            f"{1.0 / base:.3e} s exceeds {max_window:.3e} s"
        )
    wanted = min(min_window_periods / signal_hz, max_window)
    window = max(1, math.ceil(wanted * base - 1e-9)) / base

    fastest = max(drive_hz + [signal_hz])
    window_steps = math.ceil(window * samples_per_period * fastest - 1e-9)
    dt = window / window_steps

    transit = device.total_cells / phase_velocity(device)
    slowest = min(drive_hz + [signal_hz])
    settle_steps = math.ceil(max(settle_periods / signal_hz, settle_transits * transit) / dt - 1e-9)
    ramp = max(ramp_transits * transit, 2.0 / slowest)
    config = TransientConfig(
        time_step=dt, duration=(settle_steps + window_steps) * dt, settle=settle_steps * dt,
        drives=tuple(drives), termination_resistance=device.environment_impedance,
        bias_current=device.bias.dc_current if bias_current is None else bias_current,
        ramp_duration=min(ramp, settle_steps * dt), signal_frequency=signal_frequency,
        signal_port=signal_port,
    )
    logger.debug(
        f"Planned transient: dt={dt:.3e} s, settle={config.settle:.3e} s, window={window:.3e} s"
    )
    return config

def transient_sources(device: DeviceSpec, drive: DriveConfig, direction: Optional[Direction] = None,
                      signal_amplitude: float = SIGNAL_SOURCE_AMPLITUDE,
                      signal_port: Port = Port.INPUT) -> List[DriveSource]:
    """
    Norton sources for a response direction.

    Forward: PA pump at the input, FC pump at the output. Backward swaps
    the pumps. Pump sources carry twice the traveling-wave amplitude so that
    the wave entering the line has the requested power.
    """
    direction = Direction(direction or drive.response_direction)
    z0 = device.environment_impedance
    pa_port, fc_port = (Port.INPUT, Port.OUTPUT) if direction == Direction.FORWARD else (Port.OUTPUT, Port.INPUT)
    sources = []
    for tone, port, label in ((drive.pa_pump, pa_port, "a"), (drive.fc_pump, fc_port, "c")):
        if tone.enabled:
            sources.append(DriveSource(port=port, frequency=tone.frequency,
                                       amplitude=2.0 * tone.amplitude(z0), label=label))
    sources.append(DriveSource(port=signal_port, frequency=drive.signal.frequency,
                               amplitude=signal_amplitude, label="s"))
    return sources

def simulate_point(device: DeviceSpec, drive: DriveConfig, direction: Optional[Direction] = None,
                   signal_amplitude: float = SIGNAL_SOURCE_AMPLITUDE, signal_port: Port = Port.INPUT,
                   time_step_scale: float = 1.0) -> TransientResult:
    """Plan, build and integrate one run; S21 at the signal is stored on the result."""
    sources = transient_sources(device, drive, direction, signal_amplitude, signal_port)
    config = plan_transient(device, sources, drive.signal.frequency, signal_port,
                            samples_per_period=int(round(SAMPLES_PER_PERIOD * time_step_scale)))
    network, state = build_network(device, config)
    result = integrate_transient(network, config, state)
    extract_s21(result, drive.signal.frequency)
    return result

def _transient_point(device: DeviceSpec, drive: DriveConfig, signal_amplitude: float,
                     point: Tuple[float, Direction]) -> complex:
    frequency, direction = point
    result = simulate_point(device, drive.with_signal(frequency=frequency), direction, signal_amplitude)
    return result.s21[float(frequency)]

def sweep_transient(device: DeviceSpec, drive_template: DriveConfig, frequencies: Sequence[float],
                    workers: int = 1, signal_amplitude: float = SIGNAL_SOURCE_AMPLITUDE) -> TransientSpectrum:
    """
    Forward and backward transmission at every signal frequency.

    Each (frequency, direction) pair is an independent run; failures are
    logged and leave NaN in the spectrum.

    Args:
        device: Device description
        drive_template: Pumps; the signal frequency is swept
        frequencies: Signal angular frequencies (rad/s)
        workers: Process count
        signal_amplitude: Signal source amplitude (A)

    Returns:
        TransientSpectrum in input order
    """
    grid = np.asarray(list(frequencies), dtype=float)
    if grid.size == 0:
        raise ValueError("signal frequency list is empty")
    points = [(float(f), direction) for f in grid for direction in (Direction.FORWARD, Direction.BACKWARD)]
    worker = partial(_transient_point, device, drive_template, signal_amplitude)
    outcomes = run_points(worker, points, workers, description="transient")

    forward = np.full(grid.size, np.nan, dtype=complex)
    backward = np.full(grid.size, np.nan, dtype=complex)
    failures: Dict[Tuple[int, str], str] = {}
    for index, ((frequency, direction), outcome) in enumerate(zip(points, outcomes)):
        j = index // 2
        if isinstance(outcome, Exception):
            failures[(j, direction.value)] = str(outcome)
            logger.error(
                f"Transient {direction.value} point {frequency / (2 * math.pi) / 1e9:.4f} GHz failed: {outcome}"
            )
            continue
        if direction == Direction.FORWARD:
            forward[j] = outcome
        else:
            backward[j] = outcome
    return TransientSpectrum(grid, forward, backward, failures)
