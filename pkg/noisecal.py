"""
Noise bookkeeping of an amplifier chain.

Fits the two-stage model N_sys = N1 + N2 / G to system-noise data measured
at several preamplifier gains, and converts VNA power readings into a line
attenuation estimate. Noise is expressed in quanta throughout.
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from device import NumericalError

logger = logging.getLogger(__name__)

# === ERRORS ===

class RankDeficiencyError(NumericalError):
    """Raised when the samples cannot separate N1 from N2."""
    pass

# === DATA MODELS ===

class NoiseSample(BaseModel):
    """System-added noise measured at one gain."""

    model_config = ConfigDict(frozen=True)

    frequency: float = Field(..., ge=0, description="Measurement frequency (Hz)")
    gain: float = Field(..., gt=0, description="Preamplifier gain (linear)")
    nsys: float = Field(..., gt=0, description="System-added noise (quanta)")
    dataset: str = Field("", description="Label of the pump configuration")

    @classmethod
    def from_db(cls, frequency: float, gain_db: float, nsys: float, dataset: str = "") -> "NoiseSample":
        return cls(frequency=frequency, gain=10.0 ** (gain_db / 10.0), nsys=nsys, dataset=dataset)

@dataclass(frozen=True)
class NoiseFit:
    """Fitted two-stage model."""
    n1: float
    n2: float
    residual_norm: float
    sample_count: int
    flagged_negative: bool = False

# === FITTING ===

def fit_two_stage(samples: Sequence[NoiseSample], weights: Optional[Sequence[float]] = None) -> NoiseFit:
    """
    Least-squares fit of N_sys against 1/G.

    Args:
        samples: At least two samples with distinct gains
        weights: Optional per-sample weights

    Returns:
        NoiseFit with intercept N1 and slope N2; negative values are flagged, not clamped
    """
    if len(samples) < 2:
        raise RankDeficiencyError(f"Need at least two samples, got {len(samples)}")
    inverse_gain = np.array([1.0 / sample.gain for sample in samples])
    nsys = np.array([sample.nsys for sample in samples])
    if np.ptp(inverse_gain) <= 1e-12 * np.max(inverse_gain):
        raise RankDeficiencyError("All samples share the same gain; N1 and N2 cannot be separated")

    design = np.column_stack([np.ones(inverse_gain.size), inverse_gain])
    target = nsys
    if weights is not None:
        scale = np.sqrt(np.asarray(list(weights), dtype=float))
        if scale.size != nsys.size or np.any(~np.isfinite(scale)):
            raise ValueError("weights must be finite and match the samples")
        design = design * scale[:, None]
        target = target * scale
    solution, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < 2:
        raise RankDeficiencyError("Weighted design matrix is rank deficient")
    n1, n2 = float(solution[0]), float(solution[1])
    residual = float(np.linalg.norm(design @ solution - target))
    negative = n1 < 0 or n2 < 0
    if negative:
        logger.warning(f"Fitted noise parameters are negative: N1={n1:.4g}, N2={n2:.4g}")
    return NoiseFit(n1, n2, residual, len(samples), negative)

def predict_nsys(fit: NoiseFit, gain) -> np.ndarray:
    """N1 + N2 / G."""
    gain = np.asarray(gain, dtype=float)
    if np.any(gain <= 0):
        raise ValueError("gain must be positive")
    value = fit.n1 + fit.n2 / gain
    return value if value.ndim else float(value)

def input_attenuation(vna_input_power: float, vna_output_power: float, chain_gain_off: float) -> float:
    """
    Line attenuation A = P_in / (P_out / G) with the preamplifier off.

    The estimate includes the chip itself, so it bounds the line attenuation
    from above.
    """
    if vna_input_power <= 0 or vna_output_power <= 0 or chain_gain_off <= 0:
        raise ValueError("powers and gain must be positive")
    return vna_input_power * chain_gain_off / vna_output_power

def fit_by_frequency_bin(samples: Sequence[NoiseSample],
                         bin_width: float) -> Dict[Tuple[str, float], NoiseFit]:
    """
    Fit the model separately per dataset and per frequency bin.

    Bins are centred on multiples of bin_width; bins whose samples cannot be
    fitted are logged and left out.

    Args:
        samples: Samples of one or more datasets
        bin_width: Bin width (Hz)

    Returns:
        Mapping of (dataset, bin centre in Hz) to NoiseFit, sorted by key
    """
    if bin_width <= 0:
        raise ValueError("bin width must be positive")
    groups: Dict[Tuple[str, float], List[NoiseSample]] = defaultdict(list)
    for sample in samples:
        centre = round(sample.frequency / bin_width) * bin_width
        groups[(sample.dataset, centre)].append(sample)
    fits = {}
    for key in sorted(groups):
        try:
            fits[key] = fit_two_stage(groups[key])
        except RankDeficiencyError as e:
            logger.warning(f"Skipping bin {key[1] / 1e9:.3f} GHz of dataset '{key[0]}': {e}")
    return fits

def band_average_noise(samples: Sequence[NoiseSample], f_lo: float, f_hi: float,
                       dataset: Optional[str] = None) -> float:
    """Mean N_sys of the samples with f_lo <= frequency <= f_hi."""
    values = [s.nsys for s in samples
              if f_lo <= s.frequency <= f_hi and (dataset is None or s.dataset == dataset)]
    if not values:
        raise ValueError(f"No samples between {f_lo / 1e9:.3f} and {f_hi / 1e9:.3f} GHz")
    return float(np.mean(values))

def synthesize_samples(n1: float, n2: float, gains: Sequence[float], sigma: float = 0.0,
                       seed: Optional[int] = None, frequency: float = 7e9,
                       dataset: str = "") -> List[NoiseSample]:
    """
    Samples of the two-stage model with Gaussian measurement noise.

    Noise draws that would make N_sys non-positive are redrawn; a model
    mean that is itself non-positive is rejected.
    """
    rng = np.random.default_rng(seed)
    samples = []
    for gain in gains:
        mean = n1 + n2 / gain
        if mean <= 0:
            raise ValueError(f"Model N_sys {mean:.3g} at gain {gain:.3g} is not positive")
        value = mean + (rng.normal(0.0, sigma) if sigma > 0 else 0.0)
        while value <= 0:
            value = mean + rng.normal(0.0, sigma)
        samples.append(NoiseSample(frequency=frequency, gain=float(gain), nsys=float(value), dataset=dataset))
    return samples

def gain_grid(lo: float = 1.0, hi: float = 50.0, count: int = 20) -> np.ndarray:
    """Log-spaced linear gains."""
    if lo <= 0 or hi <= lo or count < 2:
        raise ValueError("gain grid needs 0 < lo < hi and at least two points")
    return np.logspace(math.log10(lo), math.log10(hi), count)
