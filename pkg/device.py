"""
Device description for dc-biased Josephson traveling-wave lines.

Holds the junction, loading and rpm parameters of a line together with the
expansion of the biased junction inductance that the dispersion, coupled-mode
and transient solvers all consume. Quantities are SI throughout (rad/s, H, F,
A, Ohm); position along the line is measured in cells.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import constants

logger = logging.getLogger(__name__)

# Reduced flux quantum hbar/2e (Wb)
PHI0 = constants.hbar / (2 * constants.e)

ArrayLike = Union[float, np.ndarray]

# === ERRORS ===

class NumericalError(Exception):
    """Base class for failures of a numerical computation."""
    pass

class DomainError(NumericalError):
    """Raised when an input lies outside the validity domain of a model."""
    pass

class SingularityError(NumericalError):
    """Raised when an expression is evaluated at one of its poles."""
    pass

# === DATA MODELS ===

class JunctionParams(BaseModel):
    """Josephson junction repeated in every cell of the line."""

    model_config = ConfigDict(frozen=True)

    critical_current: float = Field(..., gt=0, description="Critical current I_c (A)")
    junction_capacitance: float = Field(..., gt=0, description="Junction capacitance C_J (F)")

    @property
    def unbiased_inductance(self) -> float:
        """Josephson inductance at zero bias, Phi0 / (2 pi I_c)."""
        return PHI0 / self.critical_current

    @property
    def plasma_angular_frequency(self) -> float:
        """Plasma frequency 1/sqrt(L_J0 C_J) of the unbiased junction (rad/s)."""
        return 1.0 / math.sqrt(self.unbiased_inductance * self.junction_capacitance)

class BiasPoint(BaseModel):
    """dc current flowing through the junction chain."""

    model_config = ConfigDict(frozen=True)

    dc_current: float = Field(0.0, allow_inf_nan=False, description="dc bias I_d (A)")

@dataclass(frozen=True)
class NonlinearCoefficients:
    """Expansion of the biased junction inductance at one frequency."""
    static_inductance: float
    first_order: float
    second_order: float
    evaluation_frequency: float

class RpmParams(BaseModel):
    """LC tank shunted to ground every `spacing` cells."""

    model_config = ConfigDict(frozen=True)

    inductance: float = Field(..., gt=0, description="Tank inductance L_rpm (H)")
    capacitance: float = Field(..., gt=0, description="Tank capacitance C_rpm (F)")
    spacing: int = Field(..., ge=1, description="Cells between consecutive tanks")
    offset: int = Field(0, ge=0, description="Index of the first tank within a supercell")

    @model_validator(mode="after")
    def validate_offset(self) -> "RpmParams":
        """Keep the first tank inside the first spacing period."""
        if self.offset >= self.spacing:
            raise ValueError(f"rpm offset {self.offset} must be smaller than spacing {self.spacing}")
        return self

    @property
    def resonance_angular_frequency(self) -> float:
        """Bare tank resonance 1/sqrt(L_rpm C_rpm) (rad/s)."""
        return 1.0 / math.sqrt(self.inductance * self.capacitance)

class LoadingProfile(BaseModel):
    """Two-harmonic modulation of the line impedance along a supercell."""

    model_config = ConfigDict(frozen=True)

    mean_impedance: float = Field(..., gt=0, description="Mean impedance Z_m (Ohm)")
    fundamental_depth: float = Field(0.0, description="Depth of the fundamental cosine")
    second_harmonic_depth: float = Field(0.0, description="Depth of the second-harmonic cosine")
    supercell_length: int = Field(..., gt=0, description="Supercell length N_0 (cells)")

    @model_validator(mode="after")
    def validate_depths(self) -> "LoadingProfile":
        """Impedance must stay positive everywhere."""
        if abs(self.fundamental_depth) + abs(self.second_harmonic_depth) >= 1.0:
            raise ValueError(
                "loading depths must satisfy |delta_c| + |delta_c2| < 1, got "
                f"{self.fundamental_depth} and {self.second_harmonic_depth}"
            )
        return self

class DeviceSpec(BaseModel):
    """
    Full parametric description of a traveling-wave line.

    The capacitor profile is fabricated once at the design bias and design
    frequency; `bias` is the operating point the solvers evaluate.
    """

    model_config = ConfigDict(frozen=True)

    junction: JunctionParams
    rpm: Optional[RpmParams] = None
    loading: LoadingProfile
    supercell_count: int = Field(..., ge=0, description="Number of supercells N_sc")
    loss_tangent: float = Field(0.0, ge=0, description="Dielectric loss tangent")
    environment_impedance: float = Field(50.0, gt=0, description="Port impedance Z_0 (Ohm)")
    bias: BiasPoint = BiasPoint()
    design_bias: Optional[BiasPoint] = None
    design_frequency: float = Field(0.0, ge=0, description="Capacitor-profile design frequency (rad/s)")

    @model_validator(mode="after")
    def validate_device(self) -> "DeviceSpec":
        """Check rpm placement and bias against the junction."""
        if self.rpm is not None and self.loading.supercell_length % self.rpm.spacing != 0:
            raise ValueError(
                f"rpm spacing {self.rpm.spacing} does not divide the supercell length "
                f"{self.loading.supercell_length}"
            )
        for label, point in (("bias", self.bias), ("design_bias", self.design_bias)):
            if point is not None and abs(point.dc_current) >= self.junction.critical_current:
                raise ValueError(
                    f"{label} {point.dc_current:.4g} A must be below the critical current "
                    f"{self.junction.critical_current:.4g} A"
                )
        return self

    @property
    def total_cells(self) -> int:
        """Total number of cells N."""
        return self.supercell_count * self.loading.supercell_length

    @property
    def effective_design_bias(self) -> BiasPoint:
        """Bias used to size the capacitor profile."""
        return self.design_bias if self.design_bias is not None else self.bias

@dataclass(frozen=True)
class CellProfile:
    """Per-cell ground capacitance and rpm placement."""
    ground_capacitance: np.ndarray
    rpm_mask: np.ndarray

    def __post_init__(self):
        if self.ground_capacitance.shape != self.rpm_mask.shape:
            raise ValueError("capacitance and rpm arrays must have the same length")
        if np.any(self.ground_capacitance <= 0):
            raise ValueError("ground capacitances must be positive")

    @property
    def cell_count(self) -> int:
        return int(self.ground_capacitance.size)

    @property
    def rpm_count(self) -> int:
        return int(np.count_nonzero(self.rpm_mask))

    @property
    def mean_capacitance(self) -> float:
        return float(np.mean(self.ground_capacitance))

# === JUNCTION EXPANSION ===

def _bias_ratio(junction: JunctionParams, bias: BiasPoint) -> float:
    ratio = bias.dc_current / junction.critical_current
    if abs(ratio) >= 1.0:
        raise DomainError(
            f"Bias {bias.dc_current:.4g} A is not below the critical current "
            f"{junction.critical_current:.4g} A"
        )
    return ratio

def static_inductance(junction: JunctionParams, bias: BiasPoint) -> float:
    """
    Linear inductance of a junction carrying a dc current.

    Args:
        junction: Junction parameters
        bias: dc working point

    Returns:
        L_J0 / sqrt(1 - (I_d/I_c)^2) in H
    """
    ratio = _bias_ratio(junction, bias)
    return junction.unbiased_inductance / math.sqrt(1.0 - ratio * ratio)

def nonlinear_coefficients(junction: JunctionParams, bias: BiasPoint) -> Tuple[float, float]:
    """
    First and second order coefficients of the inductance expansion.

    Args:
        junction: Junction parameters
        bias: dc working point

    Returns:
        Tuple of (epsilon in 1/A, xi in 1/A^2)
    """
    _bias_ratio(junction, bias)
    ic2 = junction.critical_current ** 2
    id2 = bias.dc_current ** 2
    gap = ic2 - id2
    epsilon = bias.dc_current / gap
    xi = (ic2 + 2.0 * id2) / (2.0 * gap * gap)
    return epsilon, xi

def dressing_ratio(junction: JunctionParams, omega: ArrayLike) -> ArrayLike:
    """Squared ratio (omega / omega_p)^2, rejecting frequencies at or above the plasma resonance."""
    ratio = (np.asarray(omega, dtype=float) / junction.plasma_angular_frequency) ** 2
    if np.any(ratio >= 1.0):
        raise DomainError(
            f"Frequency above the plasma resonance "
            f"({junction.plasma_angular_frequency / (2 * np.pi) / 1e9:.3f} GHz); "
            "the effective-inductance model does not apply"
        )
    return ratio if ratio.ndim else float(ratio)

def dressed_inductance(junction: JunctionParams, bias: BiasPoint, omega: ArrayLike) -> ArrayLike:
    """Effective inductance of the junction in parallel with its own capacitance."""
    return static_inductance(junction, bias) / (1.0 - dressing_ratio(junction, omega))

def dressed_coefficients(junction: JunctionParams, bias: BiasPoint, omega: float) -> NonlinearCoefficients:
    """
    Junction expansion dressed by the junction capacitance at frequency omega.

    At omega = 0 the result equals the static expansion exactly.

    Args:
        junction: Junction parameters
        bias: dc working point
        omega: Angular frequency (rad/s)

    Returns:
        NonlinearCoefficients evaluated at omega
    """
    ratio = dressing_ratio(junction, omega)
    epsilon, xi = nonlinear_coefficients(junction, bias)
    scale = 1.0 - ratio
    return NonlinearCoefficients(
        static_inductance=static_inductance(junction, bias) / scale,
        first_order=epsilon / scale,
        second_order=(xi + (epsilon * epsilon - xi) * ratio) / (scale * scale),
        evaluation_frequency=float(omega),
    )

def dressed_nonlinearity(junction: JunctionParams, bias: BiasPoint,
                         omega: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Vectorized dressed (epsilon, xi) over an array of frequencies."""
    ratio = dressing_ratio(junction, omega)
    epsilon, xi = nonlinear_coefficients(junction, bias)
    scale = 1.0 - ratio
    return epsilon / scale, (xi + (epsilon * epsilon - xi) * ratio) / (scale * scale)

# === LOADING AND RPM ===

def loading_impedance(loading: LoadingProfile, x: ArrayLike) -> ArrayLike:
    """Engineered line impedance Z_pl at cell index x (Ohm)."""
    phase = 2.0 * np.pi * np.asarray(x, dtype=float) / loading.supercell_length
    impedance = loading.mean_impedance * (
        1.0
        + loading.fundamental_depth * np.cos(phase)
        + loading.second_harmonic_depth * np.cos(2.0 * phase)
    )
    return impedance if np.ndim(impedance) else float(impedance)

def rpm_effective_inductance(rpm: RpmParams, omega: ArrayLike) -> ArrayLike:
    """Effective inductance L_rpm / (1 - L_rpm C_rpm omega^2) of the tank."""
    detuning = 1.0 - rpm.inductance * rpm.capacitance * np.asarray(omega, dtype=float) ** 2
    if np.any(np.abs(detuning) < 1e-12):
        raise SingularityError(
            f"rpm tank evaluated at its resonance "
            f"{rpm.resonance_angular_frequency / (2 * np.pi) / 1e9:.4f} GHz"
        )
    value = rpm.inductance / detuning
    return value if np.ndim(value) else float(value)

def rpm_mask(device: DeviceSpec, x: ArrayLike) -> np.ndarray:
    """True on the cells that carry an rpm tank."""
    cells = np.asarray(x, dtype=int)
    if device.rpm is None:
        return np.zeros(cells.shape, dtype=bool)
    local = cells % device.loading.supercell_length
    return local % device.rpm.spacing == device.rpm.offset

def ground_capacitance(device: DeviceSpec, x: ArrayLike,
                       omega_design: Optional[float] = None) -> ArrayLike:
    """
    Coupling capacitance to ground that gives cell x the target impedance.

    The symmetric cell has series inductance L/2 on each side of its shunt
    branch, so requiring Z_uc(x) = Z_pl(x) at omega_design gives
    C_c = L / (Z_pl^2 + L omega^2 (L_rpm + L/4)) with L the dressed junction
    inductance at the design bias and L_rpm the tank inductance (0 off-tank).

    Args:
        device: Device description
        x: Cell index or array of indices
        omega_design: Design frequency (rad/s); defaults to device.design_frequency

    Returns:
        Capacitance in F with the shape of x
    """
    omega = device.design_frequency if omega_design is None else float(omega_design)
    inductance = dressed_inductance(device.junction, device.effective_design_bias, omega)
    cells = np.asarray(x)
    shunt_inductance = np.zeros(cells.shape)
    if device.rpm is not None:
        shunt_inductance = np.where(rpm_mask(device, cells),
                                    rpm_effective_inductance(device.rpm, omega), 0.0)
    impedance = np.asarray(loading_impedance(device.loading, cells))
    denominator = impedance ** 2 + inductance * omega ** 2 * (shunt_inductance + inductance / 4.0)
    if np.any(denominator <= 0):
        raise DomainError(
            f"Design frequency {omega / (2 * np.pi) / 1e9:.4f} GHz lies above a shunt resonance; "
            "no positive capacitance reaches the target impedance"
        )
    capacitance = inductance / denominator
    return capacitance if capacitance.ndim else float(capacitance)

def build_cell_array(device: DeviceSpec, omega_design: Optional[float] = None) -> CellProfile:
    """Capacitance and rpm placement for every cell of the line."""
    cells = np.arange(device.total_cells)
    profile = CellProfile(
        ground_capacitance=np.atleast_1d(ground_capacitance(device, cells, omega_design)).astype(float),
        rpm_mask=rpm_mask(device, cells),
    )
    logger.debug(f"Built {profile.cell_count} cells with {profile.rpm_count} rpm tanks")
    return profile

def supercell_profile(device: DeviceSpec, omega_design: Optional[float] = None) -> CellProfile:
    """Profile of a single supercell; the line repeats it supercell_count times."""
    cells = np.arange(device.loading.supercell_length)
    return CellProfile(
        ground_capacitance=np.atleast_1d(ground_capacitance(device, cells, omega_design)).astype(float),
        rpm_mask=rpm_mask(device, cells),
    )

# === DERIVED QUANTITIES ===

def phase_velocity(device: DeviceSpec, bias: Optional[BiasPoint] = None) -> float:
    """Low-frequency phase velocity 1/sqrt(L_d <C_c>) in cells/s."""
    inductance = static_inductance(device.junction, bias or device.bias)
    return 1.0 / math.sqrt(inductance * supercell_profile(device).mean_capacitance)

def rpm_resonances(device: DeviceSpec) -> Tuple[float, float]:
    """
    Bare and loaded resonances of the rpm shunt branch.

    The loaded value is the series resonance of the tank with the mean
    coupling capacitance of the rpm cells, 1/sqrt(L_rpm (C_rpm + C_c)).

    Returns:
        Tuple of (bare, loaded) angular frequencies in rad/s
    """
    if device.rpm is None:
        raise DomainError("Device has no rpm tanks")
    profile = supercell_profile(device)
    coupling = float(np.mean(profile.ground_capacitance[profile.rpm_mask]))
    loaded = 1.0 / math.sqrt(device.rpm.inductance * (device.rpm.capacitance + coupling))
    return device.rpm.resonance_angular_frequency, loaded

def with_supercells(device: DeviceSpec, supercell_count: int) -> DeviceSpec:
    """Copy of the device with a different number of supercells."""
    return DeviceSpec.model_validate({**device.model_dump(), "supercell_count": supercell_count})

def with_bias(device: DeviceSpec, dc_current: float) -> DeviceSpec:
    """Copy of the device operated at another bias, keeping the fabricated profile."""
    data = device.model_dump()
    data["design_bias"] = device.effective_design_bias.model_dump()
    data["bias"] = {"dc_current": dc_current}
    return DeviceSpec.model_validate(data)
