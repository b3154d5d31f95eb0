"""
Phase-matching conditions of the amplification and conversion processes.

Mismatches are evaluated from a dispersion table, with the pump Kerr
correction scaled by the pump reflection at the ports. Pump frequencies are
placed by scanning the mismatch on a fine grid for sign changes and refining
each bracket by bisection.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.optimize import bisect

from device import DomainError, NumericalError, dressed_nonlinearity
from dispersion import DispersionTable

logger = logging.getLogger(__name__)

# Modes decaying faster than this (Np/cell) are treated as inside a stopband
EVANESCENT_THRESHOLD = 1e-3

DEFAULT_SCAN_STEP = 2 * math.pi * 10e6
DEFAULT_ROOT_TOLERANCE = 2 * math.pi * 1e6

# === ERRORS ===

class EvanescentModeError(NumericalError):
    """Raised when a mode of a mixing process lies in a stopband."""
    pass

class NoRootError(NumericalError):
    """Raised when the mismatch does not change sign over the scanned range."""
    pass

# === DATA MODELS ===

class Process(str, Enum):
    """Mixing process whose phase matching is evaluated."""
    PA = "pa"
    FC_DOWN = "fc-down"
    FC_UP = "fc-up"

@dataclass
class MismatchCurve:
    """Mismatch over a signal grid at a fixed pump."""
    signal_frequencies: np.ndarray
    delta_beta: np.ndarray
    pump_frequency: float
    pump_amplitude: float
    process: Process

    def to_records(self) -> List[dict]:
        return [
            {"freq_GHz": omega / (2 * math.pi) / 1e9, "delta_beta_rad_per_cell": value}
            for omega, value in zip(self.signal_frequencies, self.delta_beta)
        ]

@dataclass
class PumpPlacement:
    """Matched triplet found by solve_pump_placement."""
    process: Process
    pump_frequency: float
    signal_frequency: float
    partner_frequency: float
    residual: float
    candidates: List[float] = field(default_factory=list)
    degenerate: bool = False

    @property
    def triplet_ghz(self) -> Tuple[float, float, float]:
        """(pump, signal, partner) in GHz."""
        scale = 2 * math.pi * 1e9
        return self.pump_frequency / scale, self.signal_frequency / scale, self.partner_frequency / scale

# === MISMATCHES ===

def _propagating(table: DispersionTable, omegas: Tuple[float, ...],
                 labels: Tuple[str, ...]) -> Tuple[np.ndarray, np.ndarray]:
    k, alpha, impedance = table.lookup(np.array(omegas, dtype=float))
    for value, omega, label in zip(alpha, omegas, labels):
        if value > EVANESCENT_THRESHOLD:
            raise EvanescentModeError(
                f"Mode {label} at {omega / (2 * math.pi) / 1e9:.4f} GHz is evanescent "
                f"(alpha = {value:.3g} Np/cell)"
            )
    return k, impedance

def kerr_coefficient(table: DispersionTable, omega_pump: float, pump_amplitude: float) -> float:
    """chi = xi(omega_pump) |I_0|^2 / 8 with the dressed xi of the table's bias."""
    _, xi = dressed_nonlinearity(table.device.junction, table.bias, omega_pump)
    return float(xi) * pump_amplitude ** 2 / 8.0

def pump_reflection(table: DispersionTable, omega: float) -> float:
    """|Z - Z0| / |Z + Z0| of the line at omega."""
    _, _, impedance = table.lookup(omega)
    z0 = table.device.environment_impedance
    return float(abs(impedance[0] - z0) / abs(impedance[0] + z0))

def pa_mismatch(omega_s: float, omega_a: float, pump_amplitude: float, table: DispersionTable,
                include_reflections: bool = True) -> float:
    """
    Phase mismatch of parametric amplification a -> s + i.

    Args:
        omega_s: Signal angular frequency
        omega_a: PA pump angular frequency
        pump_amplitude: PA pump current amplitude (A)
        table: Dispersion table
        include_reflections: Scale the Kerr term by (1 + Gamma_a^2)

    Returns:
        Delta beta in rad/cell
    """
    if not 0 < omega_s < omega_a:
        raise DomainError("PA mismatch needs 0 < omega_s < omega_a")
    omega_i = omega_a - omega_s
    (k_a, k_s, k_i), _ = _propagating(table, (omega_a, omega_s, omega_i), ("a", "s", "i"))
    chi = kerr_coefficient(table, omega_a, pump_amplitude)
    gamma = pump_reflection(table, omega_a) if include_reflections else 0.0
    return float(k_a - k_s - k_i + chi * (1.0 + gamma ** 2) * (k_a - 2.0 * k_s - 2.0 * k_i))

def fc_mismatch(omega_s: float, omega_c: float, pump_amplitude: float, table: DispersionTable,
                include_reflections: bool = True) -> float:
    """
    Phase mismatch of down-conversion s -> c + d.

    Args:
        omega_s: Signal angular frequency
        omega_c: FC pump angular frequency
        pump_amplitude: FC pump current amplitude (A)
        table: Dispersion table
        include_reflections: Scale the Kerr term by (1 + Gamma_c^2)

    Returns:
        Delta beta in rad/cell
    """
    if not 0 < omega_c < omega_s:
        raise DomainError("FC mismatch needs 0 < omega_c < omega_s")
    omega_d = omega_s - omega_c
    (k_c, k_d, k_s), _ = _propagating(table, (omega_c, omega_d, omega_s), ("c", "d", "s"))
    chi = kerr_coefficient(table, omega_c, pump_amplitude)
    gamma = pump_reflection(table, omega_c) if include_reflections else 0.0
    return float(k_c + k_d - k_s + chi * (1.0 + gamma ** 2) * (k_c + 2.0 * k_d - 2.0 * k_s))

def up_conversion_mismatch(omega_s: float, omega_c: float, table: DispersionTable) -> float:
    """Linear mismatch k_s + k_c - k_u of up-conversion s + c -> u (no Kerr term)."""
    if omega_s <= 0 or omega_c <= 0:
        raise DomainError("Up-conversion mismatch needs positive frequencies")
    omega_u = omega_s + omega_c
    (k_s, k_c, k_u), _ = _propagating(table, (omega_s, omega_c, omega_u), ("s", "c", "u"))
    return float(k_s + k_c - k_u)

def _evaluate(process: Process, omega_s: float, omega_pump: float, amplitude: float,
              table: DispersionTable, include_reflections: bool) -> float:
    if process == Process.PA:
        return pa_mismatch(omega_s, omega_pump, amplitude, table, include_reflections)
    if process == Process.FC_DOWN:
        return fc_mismatch(omega_s, omega_pump, amplitude, table, include_reflections)
    return up_conversion_mismatch(omega_s, omega_pump, table)

def mismatch_curve(process: Process, signal_frequencies, pump_frequency: float, table: DispersionTable,
                   pump_amplitude: float = 0.0, include_reflections: bool = True) -> MismatchCurve:
    """
    Mismatch over a signal grid; NaN where a mode is evanescent or out of range.

    Args:
        process: Mixing process
        signal_frequencies: Signal angular frequencies (rad/s)
        pump_frequency: Pump angular frequency (rad/s)
        table: Dispersion table
        pump_amplitude: Pump current amplitude (A)
        include_reflections: Use the port reflection in the Kerr term

    Returns:
        MismatchCurve aligned with the signal grid
    """
    process = Process(process)
    grid = np.asarray(list(signal_frequencies), dtype=float)
    values = np.full(grid.size, np.nan)
    for j, omega_s in enumerate(grid):
        try:
            values[j] = _evaluate(process, omega_s, pump_frequency, pump_amplitude, table, include_reflections)
        except NumericalError:
            continue
    return MismatchCurve(grid, values, pump_frequency, pump_amplitude, process)

# === PUMP PLACEMENT ===

def _triplet(process: Process, target: float, omega_pump: float) -> Tuple[float, float]:
    """(signal, partner) frequencies for a pump frequency."""
    if process == Process.PA:
        signal = 0.5 * (omega_pump + target)
        return signal, omega_pump - signal
    if process == Process.FC_DOWN:
        return target, target - omega_pump
    return target, target + omega_pump

def default_bracket(process: Process, target: float, table: DispersionTable,
                    scan_step: float = DEFAULT_SCAN_STEP) -> Tuple[float, float]:
    """
    Pump range scanned when no bracket is given.

    PA scans 12-17 GHz; down-conversion scans pumps between half the signal
    and just below it; up-conversion scans from 0.5 GHz up to the signal.
    All ranges are clipped to the table.
    """
    top = float(table.frequencies[-1])
    if process == Process.PA:
        return max(2 * math.pi * 12e9, target + scan_step), min(2 * math.pi * 17e9, top)
    if process == Process.FC_DOWN:
        return 0.5 * target, min(target - 2 * math.pi * 0.3e9, top)
    return 2 * math.pi * 0.5e9, min(target - scan_step, top - target)

def solve_pump_placement(process: Process, target: float, table: DispersionTable, amplitude: float = 0.0,
                         bracket: Optional[Tuple[float, float]] = None,
                         scan_step: float = DEFAULT_SCAN_STEP,
                         tolerance: float = DEFAULT_ROOT_TOLERANCE,
                         include_reflections: bool = True) -> PumpPlacement:
    """
    Pump frequency that phase-matches a process.

    The mismatch is scanned over the pump bracket; every sign change between
    two propagating scan points is refined by bisection and kept when the
    residual is consistent with a continuous crossing. The lowest root wins.

    Args:
        process: PA (target is the signal-idler detuning) or FC-down / FC-up
            (target is the signal frequency)
        target: Detuning or signal angular frequency (rad/s)
        table: Dispersion table
        amplitude: Pump current amplitude (A)
        bracket: Pump range (rad/s); defaults to default_bracket
        scan_step: Scan resolution (rad/s)
        tolerance: Bisection tolerance on the pump frequency (rad/s)
        include_reflections: Use the port reflection in the Kerr term

    Returns:
        PumpPlacement with the matched triplet and all candidate roots
    """
    process = Process(process)
    if target < 0 or (process != Process.PA and target == 0):
        raise DomainError("Target frequency must be positive")
    lo, hi = bracket or default_bracket(process, target, table, scan_step)
    if hi <= lo:
        raise NoRootError(
            f"Empty pump bracket [{lo / (2 * math.pi) / 1e9:.4f}, {hi / (2 * math.pi) / 1e9:.4f}] GHz"
        )

    def mismatch(omega_pump: float) -> float:
        signal, _ = _triplet(process, target, omega_pump)
        try:
            return _evaluate(process, signal, omega_pump, amplitude, table, include_reflections)
        except NumericalError:
            return math.nan

    scan = np.arange(lo, hi + 0.5 * scan_step, scan_step)
    values = np.array([mismatch(omega) for omega in scan])
    finite = np.isfinite(values)
    if np.any(finite) and np.all(np.abs(values[finite]) < 1e-12):
        logger.warning(f"{process.value} mismatch vanishes over the whole bracket; reporting a degenerate root")
        signal, partner = _triplet(process, target, float(scan[finite][0]))
        return PumpPlacement(process, float(scan[finite][0]), signal, partner,
                             float(values[finite][0]), [], degenerate=True)

    roots: List[Tuple[float, float]] = []
    for j in range(scan.size - 1):
        v0, v1 = values[j], values[j + 1]
        if not (finite[j] and finite[j + 1]):
            continue
        if v0 == 0.0:
            roots.append((float(scan[j]), 0.0))
            continue
        if v0 * v1 > 0:
            continue
        root = _refine(mismatch, float(scan[j]), float(scan[j + 1]), tolerance)
        if root is None:
            continue
        residual = mismatch(root)
        if not math.isfinite(residual) or abs(residual) > 0.25 * abs(v1 - v0):
            logger.debug(f"Rejected discontinuous crossing near {root / (2 * math.pi) / 1e9:.4f} GHz")
            continue
        roots.append((root, residual))

    if not roots:
        raise NoRootError(
            f"No {process.value} phase-matching root between {lo / (2 * math.pi) / 1e9:.3f} and "
            f"{hi / (2 * math.pi) / 1e9:.3f} GHz"
        )
    pump, residual = roots[0]
    signal, partner = _triplet(process, target, pump)
    logger.info(
        f"{process.value} matched: pump {pump / (2 * math.pi) / 1e9:.4f} GHz, signal "
        f"{signal / (2 * math.pi) / 1e9:.4f} GHz, partner {partner / (2 * math.pi) / 1e9:.4f} GHz"
    )
    return PumpPlacement(process, pump, signal, partner, residual, [root for root, _ in roots])

def _refine(func: Callable[[float], float], a: float, b: float, tolerance: float) -> Optional[float]:
    try:
        return float(bisect(func, a, b, xtol=tolerance))
    except ValueError:
        return None
