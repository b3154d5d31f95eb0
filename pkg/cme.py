"""
Seven-mode coupled-mode equations of a dc-biased Josephson line.

The modes are the amplification pump a, signal s, idler i, conversion pump c,
down- and up-converted signals d and u, and the conversion-pump harmonic c2.
Each envelope I_n(x) evolves along the line under three-wave mixing
(epsilon) and, optionally, four-wave mixing (xi) with every coupling weighted
by a phase factor that carries the wavenumber mismatch and the reflections
at both ports.

Propagation direction enters through a per-mode sign: the wavenumber of a
counter-propagating mode is negated everywhere it appears.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.integrate import solve_ivp

from device import DeviceSpec, DomainError, NumericalError, SingularityError, dressed_nonlinearity
from dispersion import DEFAULT_GRID_STEP_HZ, DispersionTable, build_dispersion_table, default_frequency_grid
from sweeps import run_points

logger = logging.getLogger(__name__)

# === ERRORS ===

class CmeIntegrationError(NumericalError):
    """Raised when the coupled-mode integration cannot complete."""
    pass

class UndefinedGainError(NumericalError):
    """Raised when a gain is requested for a mode with no input."""
    pass

# === DATA MODELS ===

class ModeId(str, Enum):
    """Closed mode basis."""
    A = "a"
    S = "s"
    I = "i"
    C = "c"
    D = "d"
    U = "u"
    C2 = "c2"

MODES: Tuple[ModeId, ...] = tuple(ModeId)
MODE_INDEX: Dict[ModeId, int] = {mode: j for j, mode in enumerate(MODES)}

class Direction(str, Enum):
    """Which response of the device is simulated."""
    FORWARD = "forward"
    BACKWARD = "backward"

class Tone(BaseModel):
    """A drive tone referred to the chip input."""

    model_config = ConfigDict(frozen=True)

    frequency: float = Field(..., gt=0, description="Angular frequency (rad/s)")
    power_dbm: float = Field(..., description="Chip-input power (dBm)")
    enabled: bool = True

    @classmethod
    def from_ghz(cls, frequency_ghz: float, power_dbm: float, enabled: bool = True) -> "Tone":
        return cls(frequency=2 * math.pi * frequency_ghz * 1e9, power_dbm=power_dbm, enabled=enabled)

    def amplitude(self, z0: float) -> float:
        """Traveling-wave current amplitude of the tone, 0 when disabled."""
        return power_to_current(self.power_dbm, z0) if self.enabled else 0.0

class DriveConfig(BaseModel):
    """Pump and signal tones applied to the device."""

    model_config = ConfigDict(frozen=True)

    pa_pump: Tone
    fc_pump: Tone
    signal: Tone
    response_direction: Direction = Direction.FORWARD

    @model_validator(mode="after")
    def warn_on_strong_signal(self) -> "DriveConfig":
        """The small-signal picture needs the signal well below both pumps."""
        for name, pump in (("PA", self.pa_pump), ("FC", self.fc_pump)):
            if pump.enabled and self.signal.power_dbm > pump.power_dbm - 20.0:
                logger.warning(
                    f"Signal power {self.signal.power_dbm:.1f} dBm is within 20 dB of the "
                    f"{name} pump ({pump.power_dbm:.1f} dBm)"
                )
        return self

    def with_signal(self, frequency: Optional[float] = None, power_dbm: Optional[float] = None) -> "DriveConfig":
        """Copy of the drive with another signal frequency or power."""
        signal = self.signal.model_copy(update={
            key: value for key, value in (("frequency", frequency), ("power_dbm", power_dbm))
            if value is not None
        })
        return self.model_copy(update={"signal": signal})

    def with_direction(self, direction: Direction) -> "DriveConfig":
        return self.model_copy(update={"response_direction": Direction(direction)})

class CmeOptions(BaseModel):
    """Switches and tolerances of the coupled-mode integration."""

    model_config = ConfigDict(frozen=True)

    include_4wm: bool = True
    include_reflections: bool = True
    complex_reflection: bool = Field(False, description="Keep the reflection phase in Gamma_n")
    relative_tolerance: float = Field(1e-9, gt=0)
    absolute_tolerance: float = Field(1e-15, gt=0)
    method: Literal["DOP853", "RK45", "RK23"] = "DOP853"
    attenuation_ceiling: float = Field(1.0, gt=0, description="Largest attenuation per cell applied to a mode (Np)")

@dataclass(frozen=True)
class ModeEnvironment:
    """Per-mode linear data in MODES order."""
    frequencies: np.ndarray
    wavenumber: np.ndarray
    attenuation: np.ndarray
    impedance: np.ndarray
    reflection: np.ndarray
    transmission_factor: np.ndarray
    port_factor: np.ndarray
    epsilon: np.ndarray
    xi: np.ndarray
    signs: np.ndarray
    cells: int
    direction: Direction = Direction.FORWARD
    degenerate: bool = False

    @property
    def kappa(self) -> np.ndarray:
        """Signed real wavenumbers used in the phase factors."""
        return self.signs * self.wavenumber

    def transmission(self, mode: ModeId) -> float:
        """Power transmission (1 - Gamma^2)^2 |t|^2 of the port mismatch."""
        j = MODE_INDEX[mode]
        gamma = abs(self.reflection[j])
        return float((1.0 - gamma ** 2) ** 2 * abs(self.transmission_factor[j]) ** 2)

@dataclass
class CmeSolution:
    """Mode amplitudes sampled along the line."""
    positions: np.ndarray
    amplitudes: np.ndarray
    environment: ModeEnvironment
    drive: DriveConfig
    options: CmeOptions
    degenerate: bool = False

    def amplitude(self, mode: ModeId) -> np.ndarray:
        return self.amplitudes[MODE_INDEX[mode]]

    def terminal_power_dbm(self, mode: ModeId, z0: float) -> float:
        """Power leaving the output port in a mode, referred to z0."""
        current = abs(self.amplitudes[MODE_INDEX[mode], -1]) ** 2 * self.environment.transmission(mode)
        watts = 0.5 * current * z0
        return 10.0 * math.log10(watts) + 30.0 if watts > 0 else -math.inf

    def mode_gains(self) -> Dict[ModeId, float]:
        """Terminal power of every mode relative to the input signal power."""
        reference = abs(self.amplitudes[MODE_INDEX[ModeId.S], 0]) ** 2
        if reference == 0:
            raise UndefinedGainError("Signal input amplitude is zero")
        return {
            mode: abs(self.amplitudes[MODE_INDEX[mode], -1]) ** 2 * self.environment.transmission(mode) / reference
            for mode in MODES
        }

@dataclass
class SpectrumResult:
    """Gain of the signal over a frequency sweep."""
    frequencies: np.ndarray
    gain_db: np.ndarray
    mode_power_dbm: np.ndarray
    skipped: np.ndarray
    direction: Direction
    failures: Dict[int, str] = field(default_factory=dict)
    degenerate: Optional[np.ndarray] = None

    def to_records(self) -> List[dict]:
        records = []
        for j, omega in enumerate(self.frequencies):
            record = {"freq_GHz": omega / (2 * math.pi) / 1e9, "gain_db": self.gain_db[j]}
            for m, mode in enumerate(MODES):
                record[f"p_{mode.value}_dbm"] = self.mode_power_dbm[m, j]
            record["degenerate"] = bool(self.degenerate[j]) if self.degenerate is not None else False
            record["skipped"] = bool(self.skipped[j])
            records.append(record)
        return records

@dataclass
class CompressionResult:
    """Signal gain versus input power at one frequency."""
    input_power_dbm: np.ndarray
    gain_db: np.ndarray
    small_signal_gain_db: float
    input_p1db_dbm: Optional[float]

# === MIXING TERMS ===

Partner = Tuple[ModeId, bool]

# (target, weight, partners); True marks a conjugated partner
THREE_WAVE_TERMS: Tuple[Tuple[ModeId, float, Tuple[Partner, ...]], ...] = (
    (ModeId.A, 1.0, ((ModeId.S, False), (ModeId.I, False))),
    (ModeId.S, 1.0, ((ModeId.A, False), (ModeId.I, True))),
    (ModeId.S, 1.0, ((ModeId.C, False), (ModeId.D, False))),
    (ModeId.S, 1.0, ((ModeId.U, False), (ModeId.C, True))),
    (ModeId.I, 1.0, ((ModeId.A, False), (ModeId.S, True))),
    (ModeId.C, 1.0, ((ModeId.S, False), (ModeId.D, True))),
    (ModeId.C, 1.0, ((ModeId.U, False), (ModeId.S, True))),
    (ModeId.C, 1.0, ((ModeId.C2, False), (ModeId.C, True))),
    (ModeId.D, 1.0, ((ModeId.S, False), (ModeId.C, True))),
    (ModeId.D, 1.0, ((ModeId.U, False), (ModeId.C2, True))),
    (ModeId.U, 1.0, ((ModeId.S, False), (ModeId.C, False))),
    (ModeId.U, 1.0, ((ModeId.C2, False), (ModeId.D, False))),
    (ModeId.C2, 0.5, ((ModeId.C, False), (ModeId.C, False))),
    (ModeId.C2, 1.0, ((ModeId.U, False), (ModeId.D, True))),
)

FOUR_WAVE_MIXING_TERMS: Tuple[Tuple[ModeId, float, Tuple[Partner, ...]], ...] = (
    (ModeId.A, 2.0, ((ModeId.U, False), (ModeId.C, True), (ModeId.I, False))),
    (ModeId.A, 2.0, ((ModeId.D, False), (ModeId.I, False), (ModeId.C, False))),
    (ModeId.S, 2.0, ((ModeId.C2, False), (ModeId.C, True), (ModeId.D, False))),
    (ModeId.S, 2.0, ((ModeId.U, False), (ModeId.C2, True), (ModeId.C, False))),
    (ModeId.I, 2.0, ((ModeId.A, False), (ModeId.U, True), (ModeId.C, False))),
    (ModeId.I, 2.0, ((ModeId.A, False), (ModeId.D, True), (ModeId.C, True))),
    (ModeId.C, 2.0, ((ModeId.U, False), (ModeId.D, True), (ModeId.C, True))),
    (ModeId.C, 2.0, ((ModeId.C2, False), (ModeId.S, True), (ModeId.D, False))),
    (ModeId.C, 2.0, ((ModeId.C2, False), (ModeId.U, True), (ModeId.S, False))),
    (ModeId.C, 2.0, ((ModeId.U, False), (ModeId.A, True), (ModeId.I, False))),
    (ModeId.C, 2.0, ((ModeId.A, False), (ModeId.D, True), (ModeId.I, True))),
    (ModeId.D, 1.0, ((ModeId.U, False), (ModeId.C, True), (ModeId.C, True))),
    (ModeId.D, 2.0, ((ModeId.C, False), (ModeId.S, False), (ModeId.C2, True))),
    (ModeId.D, 2.0, ((ModeId.A, False), (ModeId.I, True), (ModeId.C, True))),
    (ModeId.U, 1.0, ((ModeId.D, False), (ModeId.C, False), (ModeId.C, False))),
    (ModeId.U, 2.0, ((ModeId.C2, False), (ModeId.C, True), (ModeId.S, False))),
    (ModeId.U, 2.0, ((ModeId.A, False), (ModeId.I, True), (ModeId.C, False))),
    (ModeId.C2, 2.0, ((ModeId.C, False), (ModeId.S, False), (ModeId.D, True))),
    (ModeId.C2, 2.0, ((ModeId.U, False), (ModeId.S, True), (ModeId.C, False))),
)

def cross_phase_terms() -> Tuple[Tuple[ModeId, float, Tuple[Partner, ...]], ...]:
    """Self- and cross-phase modulation terms n m m* of every mode."""
    return tuple(
        (target, 1.0 if other == target else 2.0, ((target, False), (other, False), (other, True)))
        for target in MODES for other in MODES
    )

def _permutation_weight(partners: Tuple[Partner, ...]) -> float:
    counts = np.unique([MODE_INDEX[mode] * 2 + int(conj) for mode, conj in partners], return_counts=True)[1]
    return math.factorial(len(partners)) / math.prod(math.factorial(int(n)) for n in counts) / len(partners)

def degenerate_terms(terms) -> Tuple[Tuple[ModeId, float, Tuple[Partner, ...]], ...]:
    """
    Terms of the merged basis where the idler coincides with the signal.

    Every I is renamed S, in targets and partners alike. Products that become
    identical are kept once and reweighted by the number of distinct orderings
    of their partners, the same counting that sets the weights of the full tables.
    """
    merged: Dict[Tuple[ModeId, Tuple[Partner, ...]], None] = {}
    for target, _, partners in terms:
        target = ModeId.S if target == ModeId.I else target
        renamed = sorted(((ModeId.S if mode == ModeId.I else mode, conj) for mode, conj in partners),
                         key=lambda p: (MODE_INDEX[p[0]], p[1]))
        merged.setdefault((target, tuple(renamed)), None)
    return tuple((target, _permutation_weight(partners), partners) for target, partners in merged)

@dataclass(frozen=True)
class _TermArrays:
    targets: np.ndarray
    weights: np.ndarray
    partners: np.ndarray
    conjugate: np.ndarray

    @classmethod
    def build(cls, terms, order: int) -> "_TermArrays":
        if not terms:
            return cls(np.zeros(0, dtype=int), np.zeros(0), np.zeros((0, order), dtype=int),
                       np.zeros((0, order), dtype=int))
        return cls(
            targets=np.array([MODE_INDEX[target] for target, _, _ in terms]),
            weights=np.array([weight for _, weight, _ in terms]),
            partners=np.array([[MODE_INDEX[mode] for mode, _ in partners] for _, _, partners in terms]),
            conjugate=np.array([[int(conj) for _, conj in partners] for _, _, partners in terms]),
        )

_THREE_WAVE = _TermArrays.build(THREE_WAVE_TERMS, 2)
_FOUR_WAVE = _TermArrays.build(FOUR_WAVE_MIXING_TERMS + cross_phase_terms(), 3)
_THREE_WAVE_DEGENERATE = _TermArrays.build(degenerate_terms(THREE_WAVE_TERMS), 2)
_FOUR_WAVE_DEGENERATE = _TermArrays.build(degenerate_terms(FOUR_WAVE_MIXING_TERMS + cross_phase_terms()), 3)

# === MODE ENVIRONMENT ===

def mode_frequencies(omega_a: float, omega_c: float, omega_s: float) -> Dict[ModeId, float]:
    """
    Frequencies of the full mode basis from the two pumps and the signal.

    Args:
        omega_a: PA pump angular frequency
        omega_c: FC pump angular frequency
        omega_s: Signal angular frequency

    Returns:
        Mapping of every ModeId to its angular frequency
    """
    if omega_c <= 0:
        raise DomainError("FC pump frequency must be positive")
    if omega_s <= omega_c:
        raise DomainError(
            f"Signal {omega_s / (2 * math.pi) / 1e9:.4f} GHz must lie above the FC pump "
            f"{omega_c / (2 * math.pi) / 1e9:.4f} GHz; the down-converted frequency would be non-positive"
        )
    if omega_a <= omega_s:
        raise DomainError(
            f"Signal {omega_s / (2 * math.pi) / 1e9:.4f} GHz must lie below the PA pump "
            f"{omega_a / (2 * math.pi) / 1e9:.4f} GHz"
        )
    return {
        ModeId.A: omega_a,
        ModeId.S: omega_s,
        ModeId.I: omega_a - omega_s,
        ModeId.C: omega_c,
        ModeId.D: omega_s - omega_c,
        ModeId.U: omega_s + omega_c,
        ModeId.C2: 2.0 * omega_c,
    }

def propagation_signs(direction: Direction) -> np.ndarray:
    """+1 for modes traveling with the signal, -1 for the counter-propagating pump."""
    signs = np.ones(len(MODES))
    counter = ModeId.C if Direction(direction) == Direction.FORWARD else ModeId.A
    signs[MODE_INDEX[counter]] = -1.0
    return signs

def power_to_current(power_dbm: float, z0: float) -> float:
    """Current amplitude of a traveling wave carrying power_dbm into z0."""
    if z0 <= 0:
        raise ValueError("reference impedance must be positive")
    return math.sqrt(2.0 * 10.0 ** ((power_dbm - 30.0) / 10.0) / z0)

def reflection_factors(impedance: complex, z0: float, wavenumber: complex, cells: int,
                       complex_reflection: bool = False,
                       frequency: Optional[float] = None) -> Tuple[complex, complex, complex]:
    """
    Port reflection of a mode and the factors it induces along the line.

    Args:
        impedance: Line impedance at the mode frequency (Ohm)
        z0: Environment impedance (Ohm)
        wavenumber: Signed complex wavenumber k + i alpha (rad/cell)
        cells: Line length N
        complex_reflection: Keep the phase of (Z - Z0)/(Z + Z0)
        frequency: Mode frequency, used in error messages

    Returns:
        Tuple of (Gamma, t, Gamma_tilde)
    """
    if z0 <= 0:
        raise ValueError("reference impedance must be positive")
    if complex_reflection:
        gamma = (impedance - z0) / (impedance + z0)
    else:
        gamma = abs(impedance - z0) / abs(impedance + z0)
    round_trip = 1.0 - gamma * np.exp(2j * wavenumber * cells)
    if abs(round_trip) < 1e-12:
        where = "" if frequency is None else f" at {frequency / (2 * math.pi) / 1e9:.4f} GHz"
        raise SingularityError(f"Port reflections resonate{where}")
    return gamma, 1.0 / round_trip, gamma * np.exp(1j * wavenumber * cells)

def build_environment(device: DeviceSpec, table: DispersionTable, drive: DriveConfig,
                      options: Optional[CmeOptions] = None) -> ModeEnvironment:
    """Look up wavenumber, impedance, reflections and nonlinearity of every mode."""
    options = options or CmeOptions()
    frequencies = mode_frequencies(drive.pa_pump.frequency, drive.fc_pump.frequency, drive.signal.frequency)
    omega = np.array([frequencies[mode] for mode in MODES])
    k, alpha, impedance = table.lookup(omega)
    alpha = np.minimum(alpha, options.attenuation_ceiling)
    signs = propagation_signs(drive.response_direction)
    cells = device.total_cells

    reflection = np.zeros(len(MODES), dtype=complex)
    transmission_factor = np.ones(len(MODES), dtype=complex)
    port_factor = np.zeros(len(MODES), dtype=complex)
    if options.include_reflections:
        for j in range(len(MODES)):
            reflection[j], transmission_factor[j], port_factor[j] = reflection_factors(
                impedance[j], device.environment_impedance, signs[j] * k[j] + 1j * alpha[j], cells,
                options.complex_reflection, omega[j],
            )
    epsilon, xi = dressed_nonlinearity(device.junction, table.bias, omega)
    degenerate = math.isclose(frequencies[ModeId.S], frequencies[ModeId.I], rel_tol=1e-9)
    return ModeEnvironment(
        frequencies=omega, wavenumber=k, attenuation=alpha, impedance=impedance,
        reflection=reflection if options.complex_reflection else reflection.real,
        transmission_factor=transmission_factor, port_factor=port_factor,
        epsilon=np.asarray(epsilon, dtype=float), xi=np.asarray(xi, dtype=float),
        signs=signs, cells=cells, direction=Direction(drive.response_direction), degenerate=degenerate,
    )

# === PHASE FACTORS ===

def _waves(env: ModeEnvironment, x: float) -> Tuple[np.ndarray, np.ndarray]:
    forward = np.exp(1j * env.kappa * x)
    backward = np.exp(-1j * env.kappa * x)
    return forward + env.port_factor * backward, forward - env.port_factor * backward

def _checked_denominator(env: ModeEnvironment, denominators: np.ndarray, target: int, x: float) -> complex:
    value = denominators[target]
    if abs(value) < 1e-14:
        raise SingularityError(f"Phase-factor denominator of mode {MODES[target].value} vanishes at x={x:.6g}")
    return value

def _phase_factor(partners: Sequence[ModeId], conjugate: Sequence[bool], target: ModeId,
                  env: ModeEnvironment, x: float) -> complex:
    numerators, denominators = _waves(env, x)
    value = 1.0 + 0j
    for mode, conj in zip(partners, conjugate):
        wave = numerators[MODE_INDEX[mode]]
        value *= np.conj(wave) if conj else wave
    return complex(value / _checked_denominator(env, denominators, MODE_INDEX[target], x))

def phase_factor_3wm(m: ModeId, n: ModeId, p: ModeId, env: ModeEnvironment, x: float,
                     conjugate: Tuple[bool, bool] = (False, False)) -> complex:
    """Mismatch and reflection factor of the three-wave term m n -> p at position x."""
    return _phase_factor((m, n), conjugate, p, env, x)

def phase_factor_4wm(m: ModeId, n: ModeId, p: ModeId, q: ModeId, env: ModeEnvironment, x: float,
                     conjugate: Tuple[bool, bool, bool] = (False, False, False)) -> complex:
    """Mismatch and reflection factor of the four-wave term m n p -> q at position x."""
    return _phase_factor((m, n, p), conjugate, q, env, x)

# === EQUATIONS OF MOTION ===

def _mixing(terms: _TermArrays, prefactor: np.ndarray, waves: np.ndarray, fields: np.ndarray,
            denominators: np.ndarray, out: np.ndarray) -> None:
    if terms.targets.size == 0:
        return
    factors = waves[terms.conjugate, terms.partners] * fields[terms.conjugate, terms.partners]
    contribution = terms.weights * np.prod(factors, axis=1) / denominators[terms.targets]
    np.add.at(out, terms.targets, prefactor[terms.targets] * contribution)

def cme_rhs(x: float, amplitudes: np.ndarray, env: ModeEnvironment,
            options: Optional[CmeOptions] = None) -> np.ndarray:
    """
    Derivative dI_n/dx of every mode amplitude.

    A degenerate environment integrates the merged basis: the idler row stays
    at zero and its couplings act on the signal.

    Args:
        x: Position along the line (cells)
        amplitudes: Complex amplitudes in MODES order (A)
        env: Mode environment
        options: Switches; include_4wm=False drops every xi term

    Returns:
        Complex derivatives in MODES order
    """
    options = options or CmeOptions()
    numerators, denominators = _waves(env, x)
    if np.any(np.abs(denominators) < 1e-14):
        target = int(np.argmin(np.abs(denominators)))
        _checked_denominator(env, denominators, target, x)
    waves = np.stack([numerators, np.conj(numerators)])
    carried = env.transmission_factor * amplitudes
    fields = np.stack([carried, np.conj(carried)])
    kappa = env.kappa

    three_wave_terms, four_wave_terms = (
        (_THREE_WAVE_DEGENERATE, _FOUR_WAVE_DEGENERATE) if env.degenerate else (_THREE_WAVE, _FOUR_WAVE)
    )
    derivative = np.zeros(len(MODES), dtype=complex)
    three_wave = 1j * env.epsilon * kappa / (4.0 * env.transmission_factor)
    _mixing(three_wave_terms, three_wave, waves, fields, denominators, derivative)
    if options.include_4wm:
        four_wave = 1j * env.xi * kappa / (8.0 * env.transmission_factor)
        _mixing(four_wave_terms, four_wave, waves, fields, denominators, derivative)
    derivative -= env.signs * env.attenuation * amplitudes

    if not np.all(np.isfinite(derivative)):
        mode = MODES[int(np.argmin(np.isfinite(derivative)))]
        raise CmeIntegrationError(f"Non-finite derivative for mode {mode.value} at x={x:.6g}")
    return derivative

# === INTEGRATION ===

def initial_amplitudes(device: DeviceSpec, drive: DriveConfig, env: ModeEnvironment) -> np.ndarray:
    """Input amplitudes; a counter-propagating pump is seeded at its decayed value at x=0."""
    z0 = device.environment_impedance
    start = np.zeros(len(MODES), dtype=complex)
    start[MODE_INDEX[ModeId.A]] = drive.pa_pump.amplitude(z0)
    start[MODE_INDEX[ModeId.C]] = drive.fc_pump.amplitude(z0)
    start[MODE_INDEX[ModeId.S]] = drive.signal.amplitude(z0)
    counter = env.signs < 0
    start[counter] *= np.exp(-env.attenuation[counter] * env.cells)
    return start

def table_for_drive(device: DeviceSpec, drives: Sequence[DriveConfig]) -> DispersionTable:
    """Dispersion table on the default grid, extended to cover every mode of the drives."""
    highest = max(
        max(mode_frequencies(d.pa_pump.frequency, d.fc_pump.frequency, d.signal.frequency).values())
        for d in drives
    )
    grid = default_frequency_grid()
    if highest > grid[-1]:
        stop_hz = highest / (2 * math.pi) * 1.01
        grid = default_frequency_grid(stop_hz=math.ceil(stop_hz / DEFAULT_GRID_STEP_HZ) * DEFAULT_GRID_STEP_HZ)
    return build_dispersion_table(device, grid)

def integrate(device: DeviceSpec, drive: DriveConfig, options: Optional[CmeOptions] = None,
              table: Optional[DispersionTable] = None, samples: Optional[int] = None) -> CmeSolution:
    """
    Integrate the coupled-mode equations from the input to the output port.

    Args:
        device: Device description
        drive: Pumps, signal and response direction
        options: Switches and tolerances
        table: Dispersion table; built on demand when omitted
        samples: Number of output samples; defaults to one per cell

    Returns:
        CmeSolution sampled on a uniform grid over [0, N]
    """
    options = options or CmeOptions()
    table = table or table_for_drive(device, [drive])
    env = build_environment(device, table, drive, options)
    start = initial_amplitudes(device, drive, env)
    signal_ghz = drive.signal.frequency / (2 * math.pi) / 1e9
    degenerate = env.degenerate
    if degenerate:
        logger.warning(f"Degenerate operation at {signal_ghz:.4f} GHz: idler merged into the signal")

    cells = env.cells
    if cells == 0:
        return CmeSolution(np.zeros(1), start[:, None].copy(), env, drive, options, degenerate)

    positions = np.linspace(0.0, cells, (samples or cells + 1))
    result = solve_ivp(
        cme_rhs, (0.0, float(cells)), start, method=options.method, t_eval=positions,
        args=(env, options), rtol=options.relative_tolerance, atol=options.absolute_tolerance,
    )
    if not result.success:
        raise CmeIntegrationError(f"Integration failed for signal at {signal_ghz:.4f} GHz: {result.message}")
    amplitudes = result.y
    amplitudes[:, 0] = start
    return CmeSolution(result.t, amplitudes, env, drive, options, degenerate)

def signal_gain(solution: CmeSolution, env: Optional[ModeEnvironment] = None) -> float:
    """Linear power gain |I_s(N)/I_s0|^2 T_s of the signal."""
    env = env or solution.environment
    signal = solution.amplitude(ModeId.S)
    if signal[0] == 0:
        raise UndefinedGainError("Signal input amplitude is zero; gain is undefined")
    return float(abs(signal[-1] / signal[0]) ** 2 * env.transmission(ModeId.S))

def _to_db(gain: float) -> float:
    return 10.0 * math.log10(max(gain, 1e-30))

def _sweep_point(device: DeviceSpec, drive: DriveConfig, options: CmeOptions, table: DispersionTable,
                 frequency: float) -> Tuple[float, np.ndarray, bool]:
    solution = integrate(device, drive.with_signal(frequency=frequency), options, table)
    z0 = device.environment_impedance
    powers = np.array([solution.terminal_power_dbm(mode, z0) for mode in MODES])
    return _to_db(signal_gain(solution)), powers, solution.degenerate

def _near_stopband_edge(frequency: float, table: DispersionTable, tolerance: float) -> bool:
    return any(min(abs(frequency - lo), abs(frequency - hi)) < tolerance for lo, hi in table.stopbands)

def sweep_spectrum(device: DeviceSpec, drive_template: DriveConfig, signal_frequencies: Sequence[float],
                   direction: Optional[Direction] = None, options: Optional[CmeOptions] = None,
                   table: Optional[DispersionTable] = None, workers: int = 1) -> SpectrumResult:
    """
    Signal gain over a list of signal frequencies.

    Points within half a grid step of a stopband edge are skipped and
    flagged; failing points are logged and recorded while the sweep goes on.

    Args:
        device: Device description
        drive_template: Pumps and signal power; the signal frequency is swept
        signal_frequencies: Angular frequencies (rad/s)
        direction: Response direction; defaults to the template's
        options: Coupled-mode options
        table: Dispersion table; built once for the whole sweep when omitted
        workers: Process count

    Returns:
        SpectrumResult in input order
    """
    options = options or CmeOptions()
    drive = drive_template.with_direction(direction or drive_template.response_direction)
    frequencies = np.asarray(list(signal_frequencies), dtype=float)
    if frequencies.size == 0:
        raise ValueError("signal frequency list is empty")
    if table is None:
        valid = [drive.with_signal(frequency=f) for f in frequencies
                 if drive.fc_pump.frequency < f < drive.pa_pump.frequency]
        table = table_for_drive(device, valid or [drive])
    step = float(np.median(np.diff(frequencies))) if frequencies.size > 1 else 0.0
    skipped = np.array([_near_stopband_edge(f, table, 0.5 * step) for f in frequencies], dtype=bool)
    for j in np.flatnonzero(skipped):
        logger.warning(f"Skipping {frequencies[j] / (2 * math.pi) / 1e9:.4f} GHz: on a stopband edge")

    todo = [f for f, skip in zip(frequencies, skipped) if not skip]
    worker = partial(_sweep_point, device, drive, options, table)
    outcomes = iter(run_points(worker, todo, workers, description=f"CME {drive.response_direction.value}"))

    gain_db = np.full(frequencies.size, np.nan)
    powers = np.full((len(MODES), frequencies.size), np.nan)
    degenerate = np.zeros(frequencies.size, dtype=bool)
    failures: Dict[int, str] = {}
    for j in range(frequencies.size):
        if skipped[j]:
            continue
        outcome = next(outcomes)
        if isinstance(outcome, Exception):
            failures[j] = str(outcome)
            logger.error(f"CME point {frequencies[j] / (2 * math.pi) / 1e9:.4f} GHz failed: {outcome}")
            continue
        gain_db[j], powers[:, j], degenerate[j] = outcome
    return SpectrumResult(frequencies, gain_db, powers, skipped, Direction(drive.response_direction),
                          failures, degenerate)

def compression_sweep(device: DeviceSpec, drive: DriveConfig, signal_powers_dbm: Sequence[float],
                      options: Optional[CmeOptions] = None,
                      table: Optional[DispersionTable] = None) -> CompressionResult:
    """
    Signal gain versus input power and the input 1 dB compression point.

    The first (lowest) power sets the small-signal reference gain; the
    compression point is interpolated where the gain has dropped by 1 dB.
    """
    options = options or CmeOptions()
    powers = np.sort(np.asarray(list(signal_powers_dbm), dtype=float))
    if powers.size < 2:
        raise ValueError("compression sweep needs at least two powers")
    table = table or table_for_drive(device, [drive])
    gains = np.array([
        _to_db(signal_gain(integrate(device, drive.with_signal(power_dbm=p), options, table)))
        for p in powers
    ])
    reference = gains[0]
    drop = reference - gains
    p1db = None
    crossing = np.flatnonzero(drop >= 1.0)
    if crossing.size:
        j = crossing[0]
        p1db = float(np.interp(1.0, [drop[j - 1], drop[j]], [powers[j - 1], powers[j]])) if j > 0 else float(powers[0])
    return CompressionResult(powers, gains, float(reference), p1db)
