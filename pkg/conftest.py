"""
Shared fixtures and opt-in markers for the test suite.
"""

from pathlib import Path

import pytest

from config import load_device
from device import BiasPoint, DeviceSpec, JunctionParams, LoadingProfile, RpmParams

DESIGN_DEVICE_PATH = Path(__file__).parent / "twpac_design.toml"

def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run long numerical tests")
    parser.addoption("--reproduction", action="store_true", default=False,
                     help="run comparisons against published design numbers")

def pytest_collection_modifyitems(config, items):
    skips = {
        "slow": (config.getoption("--runslow"), pytest.mark.skip(reason="needs --runslow")),
        "reproduction": (config.getoption("--reproduction"), pytest.mark.skip(reason="needs --reproduction")),
    }
    for item in items:
        for keyword, (enabled, marker) in skips.items():
            if keyword in item.keywords and not enabled:
                item.add_marker(marker)

# === FIXTURES ===

@pytest.fixture(scope="session")
def design_device_path():
    """Path of the shipped device description."""
    return DESIGN_DEVICE_PATH

@pytest.fixture(scope="session")
def design_device():
    """The published design, loaded from the shipped file."""
    return load_device(DESIGN_DEVICE_PATH)

@pytest.fixture
def plain_device():
    """Short unloaded line without rpm tanks, lossless and unbiased."""
    return DeviceSpec(
        junction=JunctionParams(critical_current=5e-6, junction_capacitance=240.5e-15),
        rpm=None,
        loading=LoadingProfile(mean_impedance=50.0, supercell_length=6),
        supercell_count=2,
        loss_tangent=0.0,
        bias=BiasPoint(dc_current=0.0),
    )

@pytest.fixture
def small_rpm_device():
    """One supercell of the published loading with rpm tanks, biased at 1.5 uA."""
    return DeviceSpec(
        junction=JunctionParams(critical_current=5e-6, junction_capacitance=240.5e-15),
        rpm=RpmParams(inductance=230e-12, capacitance=557e-15, spacing=6),
        loading=LoadingProfile(mean_impedance=47.0, fundamental_depth=0.1,
                               second_harmonic_depth=0.12, supercell_length=66),
        supercell_count=1,
        loss_tangent=4e-4,
        bias=BiasPoint(dc_current=1.5e-6),
    )
