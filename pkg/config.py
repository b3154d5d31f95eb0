"""
Configuration management for the TWPAC toolkit.

This module loads environment settings (output directory, worker count, log
level) and ingests device description files, validating them into DeviceSpec
objects with clear error reporting for invalid keys.
"""

import json
import logging
import math
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Optional, Union

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from device import BiasPoint, DeviceSpec, JunctionParams, LoadingProfile, RpmParams

logger = logging.getLogger(__name__)

# Load environment variables
load_dotenv()

class ConfigurationError(Exception):
    """Raised when configuration or a device file fails validation."""
    pass

class AppConfig:
    """
    Environment configuration with validation and fallback values.

    Every setting is read from the environment on access so tests and the
    CLI can override it.
    """

    def __init__(self):
        """Initialize configuration with validation."""
        self._validate_env_vars()

    @property
    def output_dir(self) -> Path:
        """Directory receiving CSV, SVG and manifest files."""
        return Path(os.getenv("TWPAC_OUTPUT_DIR", "./results"))

    @property
    def workers(self) -> int:
        """Default process count of the sweeps."""
        raw = os.getenv("TWPAC_WORKERS")
        if raw is None or not raw.strip():
            return os.cpu_count() or 1
        try:
            value = int(raw)
        except ValueError:
            raise ConfigurationError(f"TWPAC_WORKERS must be an integer, got '{raw}'")
        if value < 1:
            raise ConfigurationError(f"TWPAC_WORKERS must be at least 1, got {value}")
        return value

    @property
    def log_level(self) -> str:
        """Logging level name."""
        return os.getenv("TWPAC_LOG_LEVEL", "INFO").upper()

    @property
    def is_log_level_valid(self) -> bool:
        return self.log_level in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

    def _validate_env_vars(self) -> None:
        """Log the status of every setting without failing at import."""
        status = {
            "Output directory": str(self.output_dir),
            "Log level": self.log_level if self.is_log_level_valid else f"{self.log_level} (invalid, INFO used)",
        }
        try:
            status["Workers"] = str(self.workers)
        except ConfigurationError as e:
            status["Workers"] = f"⚠️  {e}"
        for setting, value in status.items():
            logger.debug(f"{setting}: {value}")

# === DEVICE FILES ===

class RpmConfig(BaseModel):
    """rpm tank section of a device file."""

    model_config = ConfigDict(extra="forbid")

    L_pH: float = Field(..., gt=0, description="Tank inductance (pH)")
    C_fF: float = Field(..., gt=0, description="Tank capacitance (fF)")
    spacing: int = Field(..., ge=1, description="Cells between tanks")
    offset: int = Field(0, ge=0, description="First tank index within a supercell")

class LoadingConfig(BaseModel):
    """Periodic loading section of a device file."""

    model_config = ConfigDict(extra="forbid")

    Zm_ohm: float = Field(..., gt=0, description="Mean loading impedance (Ohm)")
    delta_c: float = Field(0.0, description="Fundamental modulation depth")
    delta_c2: float = Field(0.0, description="Second-harmonic modulation depth")
    supercell_cells: int = Field(..., gt=0, description="Cells per supercell")

    @field_validator("delta_c2")
    @classmethod
    def validate_depths(cls, value: float, info) -> float:
        """Loading depths must keep the impedance positive."""
        fundamental = info.data.get("delta_c", 0.0)
        if abs(fundamental) + abs(value) >= 1.0:
            raise ValueError(f"|delta_c| + |delta_c2| must be below 1, got {abs(fundamental) + abs(value):.4g}")
        return value

class DeviceConfig(BaseModel):
    """
    On-disk device description in engineering units.

    Unknown keys are rejected so typos do not silently fall back to defaults.
    """

    model_config = ConfigDict(extra="forbid")

    critical_current_uA: float = Field(..., gt=0, description="Junction critical current (uA)")
    junction_capacitance_fF: float = Field(..., gt=0, description="Junction capacitance (fF)")
    rpm: Optional[RpmConfig] = None
    loading: LoadingConfig
    supercell_count: int = Field(..., ge=0, description="Number of supercells")
    loss_tangent: float = Field(0.0, ge=0, description="Dielectric loss tangent")
    environment_impedance_ohm: float = Field(50.0, gt=0, description="Port impedance (Ohm)")
    bias_uA: float = Field(0.0, description="Operating dc bias (uA)")
    design_bias_uA: Optional[float] = Field(None, description="Bias the capacitors are sized for (uA)")
    design_frequency_GHz: float = Field(0.0, ge=0, description="Frequency the capacitors are sized for (GHz)")

    def to_spec(self) -> DeviceSpec:
        """Convert to SI units and validate the cross-field device invariants."""
        try:
            return DeviceSpec(
                junction=JunctionParams(
                    critical_current=self.critical_current_uA * 1e-6,
                    junction_capacitance=self.junction_capacitance_fF * 1e-15,
                ),
                rpm=None if self.rpm is None else RpmParams(
                    inductance=self.rpm.L_pH * 1e-12, capacitance=self.rpm.C_fF * 1e-15,
                    spacing=self.rpm.spacing, offset=self.rpm.offset,
                ),
                loading=LoadingProfile(
                    mean_impedance=self.loading.Zm_ohm, fundamental_depth=self.loading.delta_c,
                    second_harmonic_depth=self.loading.delta_c2,
                    supercell_length=self.loading.supercell_cells,
                ),
                supercell_count=self.supercell_count,
                loss_tangent=self.loss_tangent,
                environment_impedance=self.environment_impedance_ohm,
                bias=BiasPoint(dc_current=self.bias_uA * 1e-6),
                design_bias=None if self.design_bias_uA is None else BiasPoint(dc_current=self.design_bias_uA * 1e-6),
                design_frequency=2 * math.pi * self.design_frequency_GHz * 1e9,
            )
        except ValidationError as e:
            raise ConfigurationError(_describe(e)) from e

    @classmethod
    def from_spec(cls, spec: DeviceSpec) -> "DeviceConfig":
        """Engineering-unit form of a DeviceSpec."""
        rpm = None
        if spec.rpm is not None:
            rpm = RpmConfig(L_pH=spec.rpm.inductance * 1e12, C_fF=spec.rpm.capacitance * 1e15,
                            spacing=spec.rpm.spacing, offset=spec.rpm.offset)
        return cls(
            critical_current_uA=spec.junction.critical_current * 1e6,
            junction_capacitance_fF=spec.junction.junction_capacitance * 1e15,
            rpm=rpm,
            loading=LoadingConfig(
                Zm_ohm=spec.loading.mean_impedance, delta_c=spec.loading.fundamental_depth,
                delta_c2=spec.loading.second_harmonic_depth, supercell_cells=spec.loading.supercell_length,
            ),
            supercell_count=spec.supercell_count,
            loss_tangent=spec.loss_tangent,
            environment_impedance_ohm=spec.environment_impedance,
            bias_uA=spec.bias.dc_current * 1e6,
            design_bias_uA=None if spec.design_bias is None else spec.design_bias.dc_current * 1e6,
            design_frequency_GHz=spec.design_frequency / (2 * math.pi) / 1e9,
        )

def _describe(error: ValidationError) -> str:
    """One line per violated constraint, naming the key."""
    lines = []
    for item in error.errors():
        key = ".".join(str(part) for part in item["loc"]) or "<device>"
        lines.append(f"{key}: {item['msg']}")
    return "Invalid device description: " + "; ".join(lines)

def load_device(path: Union[str, Path]) -> DeviceSpec:
    """
    Read and validate a TOML or JSON device file.

    Args:
        path: Device file; the suffix selects the format

    Returns:
        Validated DeviceSpec

    Raises:
        ConfigurationError: Missing file, unknown format or schema violation
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Device file not found: {path}")
    try:
        if path.suffix == ".toml":
            with open(path, "rb") as handle:
                data = tomllib.load(handle)
        elif path.suffix == ".json":
            with open(path, "r", encoding="utf-8") as handle:
                data = json.load(handle)
        else:
            raise ConfigurationError(f"Unsupported device file format '{path.suffix}' (use .toml or .json)")
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"Cannot parse {path}: {e}") from e
    try:
        device_config = DeviceConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(_describe(e)) from e
    spec = device_config.to_spec()
    logger.info(f"✅ Loaded device {path.name}: {spec.total_cells} cells")
    return spec

def emit_device(spec: DeviceSpec, path: Union[str, Path]) -> Path:
    """Write the JSON form of a device accepted by load_device."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = DeviceConfig.from_spec(spec).model_dump(exclude_none=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
    return path

# Create global configuration instance
config = AppConfig()
