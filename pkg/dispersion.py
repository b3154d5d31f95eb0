"""
Linear response of the engineered line from cascaded ABCD matrices.

Every cell is a symmetric two-port: half the dressed junction impedance, a
shunt branch (coupling capacitor, in series with the rpm tank on tank cells)
and the second half of the junction. The supercell product is raised to the
number of supercells to obtain the whole line, from which transmission,
wavenumber, impedance and stopbands follow.

Products of many cells overflow inside stopbands, so cascades are carried as
a normalized matrix plus a running natural-log scale factor.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from device import (
    BiasPoint, CellProfile, DeviceSpec, DomainError, SingularityError,
    dressed_inductance, phase_velocity, supercell_profile,
)

logger = logging.getLogger(__name__)

DEFAULT_GRID_START_HZ = 0.02e9
DEFAULT_GRID_STOP_HZ = 16e9
DEFAULT_GRID_STEP_HZ = 10e6
DEFAULT_STOPBAND_THRESHOLD_DB = -10.0

# === DATA MODELS ===

@dataclass(frozen=True)
class TwoPortMatrix:
    """ABCD matrix of a linear two-port."""
    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def identity(cls) -> "TwoPortMatrix":
        return cls(1.0 + 0j, 0j, 0j, 1.0 + 0j)

    @classmethod
    def from_array(cls, matrix: np.ndarray) -> "TwoPortMatrix":
        return cls(complex(matrix[0, 0]), complex(matrix[0, 1]),
                   complex(matrix[1, 0]), complex(matrix[1, 1]))

    def to_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def __matmul__(self, other: "TwoPortMatrix") -> "TwoPortMatrix":
        return TwoPortMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    @property
    def determinant(self) -> complex:
        return self.a * self.d - self.b * self.c

    def inverse(self) -> "TwoPortMatrix":
        det = self.determinant
        return TwoPortMatrix(self.d / det, -self.b / det, -self.c / det, self.a / det)

@dataclass(frozen=True)
class DispersionPoint:
    """Linear response of the line at one frequency."""
    frequency: float
    wavenumber: float
    nonlinear_wavenumber: float
    characteristic_impedance: complex
    s21: complex
    attenuation_per_cell: float

@dataclass
class DispersionTable:
    """
    Linear response of a line over an increasing frequency grid.

    `wavenumber` is the unwrapped Bloch phase per cell (rad/cell) and
    `attenuation` the Bloch decay per cell (Np/cell); both come from the
    forward eigenvalue of the supercell matrix.
    """
    frequencies: np.ndarray
    wavenumber: np.ndarray
    attenuation: np.ndarray
    impedance: np.ndarray
    s21: np.ndarray
    device: DeviceSpec
    bias: BiasPoint
    loss_tangent: float = 0.0
    s11: Optional[np.ndarray] = None
    s22: Optional[np.ndarray] = None
    stopbands: List[Tuple[float, float]] = field(default_factory=list)
    velocity: Optional[float] = None

    def __post_init__(self):
        if self.frequencies.size == 0 or np.any(np.diff(self.frequencies) <= 0):
            raise ValueError("dispersion frequencies must be non-empty and strictly increasing")
        if self.velocity is None:
            self.velocity = phase_velocity(self.device, self.bias)

    @property
    def nonlinear_wavenumber(self) -> np.ndarray:
        """k* = k - omega / v_p (rad/cell)."""
        return self.wavenumber - self.frequencies / self.velocity

    @property
    def s21_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(np.abs(self.s21))

    @property
    def points(self) -> List[DispersionPoint]:
        kstar = self.nonlinear_wavenumber
        return [
            DispersionPoint(
                frequency=float(self.frequencies[j]),
                wavenumber=float(self.wavenumber[j]),
                nonlinear_wavenumber=float(kstar[j]),
                characteristic_impedance=complex(self.impedance[j]),
                s21=complex(self.s21[j]),
                attenuation_per_cell=float(self.attenuation[j]),
            )
            for j in range(self.frequencies.size)
        ]

    def lookup(self, omega) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Interpolate wavenumber, attenuation and impedance at arbitrary frequencies.

        Below the first grid point the line is treated as dispersionless.

        Args:
            omega: Angular frequency or array of frequencies (rad/s)

        Returns:
            Tuple of (k in rad/cell, alpha in Np/cell, Z in Ohm) arrays
        """
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        if np.any(omega > self.frequencies[-1] * (1 + 1e-12)) or np.any(omega < 0):
            raise DomainError(
                f"Frequency outside the dispersion table (up to "
                f"{self.frequencies[-1] / (2 * np.pi) / 1e9:.3f} GHz)"
            )
        k = np.interp(omega, self.frequencies, self.wavenumber)
        alpha = np.interp(omega, self.frequencies, self.attenuation)
        z = (np.interp(omega, self.frequencies, self.impedance.real)
             + 1j * np.interp(omega, self.frequencies, self.impedance.imag))
        below = omega < self.frequencies[0]
        k = np.where(below, self.wavenumber[0] * omega / self.frequencies[0], k)
        return k, alpha, z

# === CELL MATRICES ===

def lossy_capacitance(capacitance, loss_tangent: float):
    """Complex capacitance C (1 - i tan(delta)) of a lossy dielectric."""
    if loss_tangent < 0:
        raise ValueError("loss tangent must be non-negative")
    return capacitance * (1.0 - 1j * loss_tangent)

def _shunt_admittance(device: DeviceSpec, capacitance: np.ndarray, has_rpm: np.ndarray,
                      omega: np.ndarray, loss_tangent: float) -> np.ndarray:
    """Admittance of each shunt branch, shape (frequencies, cells)."""
    w = omega[:, None]
    coupling = 1j * w * lossy_capacitance(capacitance[None, :], loss_tangent)
    if device.rpm is None or not np.any(has_rpm):
        return np.broadcast_to(coupling, (omega.size, capacitance.size)).copy()
    rpm = device.rpm
    with np.errstate(divide="ignore", invalid="ignore"):
        tank = 1.0 / (1j * w * rpm.inductance) + 1j * w * lossy_capacitance(rpm.capacitance, loss_tangent)
        total = coupling + tank
        series = np.where(np.isfinite(tank), coupling * tank / total, coupling)
    bad = has_rpm[None, :] & ~np.isfinite(series)
    if np.any(bad):
        j, cell = np.argwhere(bad)[0]
        raise SingularityError(
            f"Shunt branch of cell {cell} resonates at {omega[j] / (2 * np.pi) / 1e9:.4f} GHz"
        )
    return np.where(has_rpm[None, :], series, coupling)

def _cell_stack(device: DeviceSpec, profile: CellProfile, omega: np.ndarray,
                bias: BiasPoint, loss_tangent: float) -> np.ndarray:
    """ABCD matrices of every cell of a profile, shape (frequencies, cells, 2, 2)."""
    half = 0.5j * omega * dressed_inductance(device.junction, bias, omega)
    half = np.asarray(half)[:, None]
    admittance = _shunt_admittance(device, profile.ground_capacitance, profile.rpm_mask,
                                   omega, loss_tangent)
    stack = np.empty(admittance.shape + (2, 2), dtype=complex)
    stack[..., 0, 0] = 1.0 + half * admittance
    stack[..., 0, 1] = half * (2.0 + half * admittance)
    stack[..., 1, 0] = admittance
    stack[..., 1, 1] = stack[..., 0, 0]
    return stack

def unit_cell_matrix(device: DeviceSpec, capacitance: float, has_rpm: bool, omega: float,
                     bias: Optional[BiasPoint] = None,
                     loss_tangent: Optional[float] = None) -> TwoPortMatrix:
    """
    ABCD matrix of one symmetric cell.

    Args:
        device: Device supplying the junction and rpm tank
        capacitance: Coupling capacitance to ground of the cell (F)
        has_rpm: Whether the shunt branch contains the rpm tank
        omega: Angular frequency (rad/s)
        bias: Operating bias; defaults to device.bias
        loss_tangent: Dielectric loss; defaults to device.loss_tangent

    Returns:
        TwoPortMatrix of the cell
    """
    profile = CellProfile(np.array([capacitance], dtype=float), np.array([has_rpm]))
    stack = _cell_stack(device, profile, np.array([float(omega)]), bias or device.bias,
                        device.loss_tangent if loss_tangent is None else loss_tangent)
    return TwoPortMatrix.from_array(stack[0, 0])

def cascade(matrices: Sequence[TwoPortMatrix]) -> TwoPortMatrix:
    """Ordered product of two-port matrices, input side first."""
    if len(matrices) == 0:
        raise ValueError("cascade needs at least one matrix")
    result = TwoPortMatrix.identity()
    for matrix in matrices:
        result = result @ matrix
    return result

# === SCALED CASCADES ===

def _normalize(matrix: np.ndarray, log_scale: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    scale = np.max(np.abs(matrix), axis=(-2, -1))
    scale = np.where(scale > 0, scale, 1.0)
    return matrix / scale[..., None, None], log_scale + np.log(scale)

def _scaled_product(stack: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Product over the cell axis of a (frequencies, cells, 2, 2) stack."""
    count = stack.shape[0]
    result = np.broadcast_to(np.eye(2, dtype=complex), (count, 2, 2)).copy()
    log_scale = np.zeros(count)
    for j in range(stack.shape[1]):
        result, log_scale = _normalize(result @ stack[:, j], log_scale)
    return result, log_scale

def _scaled_power(matrix: np.ndarray, log_scale: np.ndarray,
                  exponent: int) -> Tuple[np.ndarray, np.ndarray]:
    result = np.broadcast_to(np.eye(2, dtype=complex), matrix.shape).copy()
    result_log = np.zeros(log_scale.shape)
    base, base_log = matrix, log_scale
    while exponent > 0:
        if exponent & 1:
            result, result_log = _normalize(result @ base, result_log + base_log)
        exponent >>= 1
        if exponent:
            base, base_log = _normalize(base @ base, 2.0 * base_log)
    return result, result_log

def _forward_exponent(matrix: np.ndarray, log_scale: np.ndarray) -> np.ndarray:
    """
    Log of the forward Bloch eigenvalue of scaled ABCD matrices.

    The forward wave decays towards the output (|lambda| > 1); on the unit
    circle it is the eigenvector carrying positive power towards the output.
    """
    a, b, c, d = matrix[..., 0, 0], matrix[..., 0, 1], matrix[..., 1, 0], matrix[..., 1, 1]
    half_trace = 0.5 * (a + d)
    with np.errstate(over="ignore", under="ignore"):
        root = np.sqrt(half_trace * half_trace - np.exp(-2.0 * log_scale))
    plus, minus = half_trace + root, half_trace - root
    with np.errstate(divide="ignore"):
        gap = np.log(np.abs(plus)) - np.log(np.abs(minus))
    # V/I of each eigenvector, from whichever row is better conditioned
    flow = []
    for mu in (plus, minus):
        use_top = np.abs(mu - a) >= np.abs(c)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(use_top, b / (mu - a), (mu - d) / c)
        flow.append(np.real(ratio))
    tied = np.abs(gap) < 1e-9
    choose_plus = np.where(tied, flow[0] >= flow[1], gap > 0)
    forward = np.where(choose_plus, plus, minus)
    return log_scale + np.log(forward.astype(complex))

# === MATRIX QUANTITIES ===

def s21_from_matrix(matrix: TwoPortMatrix, z0: float) -> complex:
    """Forward transmission 2 / (A + B/Z0 + C Z0 + D)."""
    if z0 <= 0:
        raise ValueError("reference impedance must be positive")
    return 2.0 / (matrix.a + matrix.b / z0 + matrix.c * z0 + matrix.d)

def s11_from_matrix(matrix: TwoPortMatrix, z0: float) -> complex:
    """Input reflection of a two-port between two Z0 ports."""
    if z0 <= 0:
        raise ValueError("reference impedance must be positive")
    numerator = matrix.a + matrix.b / z0 - matrix.c * z0 - matrix.d
    return numerator / (matrix.a + matrix.b / z0 + matrix.c * z0 + matrix.d)

def wavenumber(matrix: TwoPortMatrix, cells: int) -> complex:
    """
    Per-cell complex wavenumber k + i alpha of a periodic cascade.

    A single matrix yields the principal phase; sweeps unwrap it along
    frequency (see build_dispersion_table).
    """
    if cells < 1:
        raise ValueError("wavenumber needs at least one cell")
    exponent = _forward_exponent(matrix.to_array()[None], np.zeros(1))[0]
    return complex(exponent.imag, exponent.real) / cells

def characteristic_impedance(matrix: TwoPortMatrix) -> complex:
    """sqrt(B/C) taking the root with non-negative real part."""
    if matrix.c == 0:
        raise SingularityError("C entry vanishes; impedance is undefined")
    return complex(np.sqrt(complex(matrix.b / matrix.c)))

def attenuation_constant(conductance, impedance):
    """Weak-loss attenuation G Z / 2 per cell (Np/cell)."""
    return 0.5 * np.asarray(conductance) * np.real(impedance)

def shunt_conductance(capacitance, omega, loss_tangent: float):
    """Parallel conductance omega C tan(delta) of a lossy capacitor."""
    return np.asarray(omega) * np.asarray(capacitance) * loss_tangent

# === TABLES ===

def default_frequency_grid(start_hz: float = DEFAULT_GRID_START_HZ,
                           stop_hz: float = DEFAULT_GRID_STOP_HZ,
                           step_hz: float = DEFAULT_GRID_STEP_HZ) -> np.ndarray:
    """Uniform angular-frequency grid including both ends."""
    count = int(round((stop_hz - start_hz) / step_hz)) + 1
    return 2.0 * np.pi * np.linspace(start_hz, start_hz + (count - 1) * step_hz, count)

def _refined_grid(device: DeviceSpec, omega: np.ndarray, bias: BiasPoint) -> np.ndarray:
    """Halve the grid step until the supercell Bloch phase advances by less than pi/2 per step."""
    cells = device.loading.supercell_length
    velocity = phase_velocity(device, bias)
    grid = omega
    while grid.size > 1 and cells * np.max(np.diff(grid)) / velocity > np.pi / 2:
        refined = np.empty(2 * grid.size - 1)
        refined[0::2] = grid
        refined[1::2] = 0.5 * (grid[1:] + grid[:-1])
        grid = refined
        logger.warning(f"Dispersion grid refined to {grid.size} points to keep the phase unwrap valid")
    return grid

def find_stopbands(table: DispersionTable,
                   threshold_db: float = DEFAULT_STOPBAND_THRESHOLD_DB) -> List[Tuple[float, float]]:
    """
    Contiguous frequency intervals whose transmission is below a threshold.

    Args:
        table: Dispersion table covering the band of interest
        threshold_db: Transmission threshold in dB

    Returns:
        List of (omega_lo, omega_hi) pairs in rad/s
    """
    below = table.s21_db < threshold_db
    bands = []
    start = None
    for j, flag in enumerate(below):
        if flag and start is None:
            start = j
        elif not flag and start is not None:
            bands.append((float(table.frequencies[start]), float(table.frequencies[j - 1])))
            start = None
    if start is not None:
        bands.append((float(table.frequencies[start]), float(table.frequencies[-1])))
    return bands

def build_dispersion_table(device: DeviceSpec, frequencies: Optional[Iterable[float]] = None,
                           bias: Optional[BiasPoint] = None, loss_tangent: Optional[float] = None,
                           threshold_db: float = DEFAULT_STOPBAND_THRESHOLD_DB) -> DispersionTable:
    """
    Linear response of the whole line over a frequency grid.

    Args:
        device: Device description
        frequencies: Increasing angular frequencies (rad/s); defaults to 0.02-16 GHz in 10 MHz steps
        bias: Operating bias; defaults to device.bias
        loss_tangent: Dielectric loss; defaults to device.loss_tangent
        threshold_db: Transmission threshold for stopband detection

    Returns:
        DispersionTable with detected stopbands
    """
    bias = bias or device.bias
    loss_tangent = device.loss_tangent if loss_tangent is None else loss_tangent
    omega = default_frequency_grid() if frequencies is None else np.asarray(list(frequencies), dtype=float)
    if omega.size == 0 or np.any(omega <= 0):
        raise ValueError("frequencies must be positive")
    omega = _refined_grid(device, omega, bias)

    profile = supercell_profile(device)
    stack = _cell_stack(device, profile, omega, bias, loss_tangent)
    supercell, supercell_log = _scaled_product(stack)
    total, total_log = _scaled_power(supercell, supercell_log, device.supercell_count)

    exponent = _forward_exponent(supercell, supercell_log)
    cells = device.loading.supercell_length
    k = np.unwrap(exponent.imag) / cells
    alpha = exponent.real / cells

    a, b, c, d = total[:, 0, 0], total[:, 0, 1], total[:, 1, 0], total[:, 1, 1]
    z0 = device.environment_impedance
    denominator = a + b / z0 + c * z0 + d
    s21 = np.exp(np.log(2.0) - total_log - np.log(denominator))
    s11 = (a + b / z0 - c * z0 - d) / denominator
    s22 = (-a + b / z0 - c * z0 + d) / denominator
    with np.errstate(divide="ignore", invalid="ignore"):
        impedance = np.sqrt(b / c)
    if device.supercell_count == 0:
        impedance = np.full(omega.shape, z0, dtype=complex)

    table = DispersionTable(
        frequencies=omega, wavenumber=k, attenuation=alpha, impedance=impedance,
        s21=s21, s11=s11, s22=s22, device=device, bias=bias, loss_tangent=loss_tangent,
    )
    table.stopbands = find_stopbands(table, threshold_db)
    logger.info(
        f"Dispersion table: {omega.size} points, {len(table.stopbands)} stopbands below "
        f"{threshold_db:.1f} dB"
    )
    return table
