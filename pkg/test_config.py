"""
Unit tests for environment settings and device-file ingestion.
"""

import json
import math
import os

import pytest

from config import AppConfig, ConfigurationError, emit_device, load_device

SMALL_DEVICE = """
critical_current_uA = 5.0
junction_capacitance_fF = 240.5
supercell_count = 2

[loading]
Zm_ohm = 50.0
supercell_cells = 6
"""

# === FIXTURES ===

@pytest.fixture
def write_device(tmp_path):
    """Factory writing device text to a file with the given suffix."""
    def _write(text: str, name: str = "device.toml"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return _write

# === DEVICE FILE TESTS ===

class TestLoadDevice:
    """Test cases for reading and validating device descriptions."""

    def test_published_design(self, design_device):
        """Test the shipped TOML converts to SI units."""
        assert design_device.total_cells == 2640
        assert design_device.junction.critical_current == pytest.approx(5e-6)
        assert design_device.rpm.capacitance == pytest.approx(557e-15)
        assert design_device.loading.second_harmonic_depth == pytest.approx(0.12)
        assert design_device.bias.dc_current == pytest.approx(1.5e-6)
        assert design_device.design_frequency == 0.0

    def test_half_pump_sizing_variant(self, design_device, design_device_path, write_device):
        """Test the shipped file switches to sizing at 7.25 GHz by its one documented key."""
        text = design_device_path.read_text(encoding="utf-8")
        assert text.count("design_frequency_GHz = 0.0") == 1
        variant = load_device(write_device(text.replace("design_frequency_GHz = 0.0", "design_frequency_GHz = 7.25")))
        assert variant.design_frequency == pytest.approx(2 * math.pi * 7.25e9)
        assert variant.model_copy(update={"design_frequency": 0.0}) == design_device

    def test_defaults(self, write_device):
        """Test optional keys fall back to a lossless, unbiased 50 Ohm line."""
        device = load_device(write_device(SMALL_DEVICE))
        assert device.rpm is None
        assert device.loss_tangent == 0.0
        assert device.environment_impedance == 50.0
        assert device.bias.dc_current == 0.0
        assert device.design_bias is None

    def test_json_round_trip(self, design_device, tmp_path):
        """Test emitted JSON loads back to the same device."""
        path = emit_device(design_device, tmp_path / "out" / "device.json")
        assert json.loads(path.read_text())["rpm"]["spacing"] == 6
        device = load_device(path)
        assert device.total_cells == design_device.total_cells
        assert device.rpm.inductance == pytest.approx(design_device.rpm.inductance)
        assert device.loading.mean_impedance == pytest.approx(47.0)
        assert device.design_bias is None

    def test_missing_file(self, tmp_path):
        """Test a missing file is a configuration error."""
        with pytest.raises(ConfigurationError, match="not found"):
            load_device(tmp_path / "absent.toml")

    def test_unsupported_suffix(self, write_device):
        """Test only TOML and JSON are accepted."""
        with pytest.raises(ConfigurationError, match="Unsupported"):
            load_device(write_device(SMALL_DEVICE, "device.yaml"))

    def test_parse_error(self, write_device):
        """Test malformed files report the parser message."""
        with pytest.raises(ConfigurationError, match="Cannot parse"):
            load_device(write_device("supercell_count = = 2\n"))
        with pytest.raises(ConfigurationError, match="Cannot parse"):
            load_device(write_device("{not json", "device.json"))

    def test_unknown_key(self, write_device):
        """Test a misspelt key is rejected by name."""
        with pytest.raises(ConfigurationError, match="loss_tangnet"):
            load_device(write_device(SMALL_DEVICE.replace("supercell_count", "loss_tangnet = 1e-4\nsupercell_count")))

    def test_missing_key(self, write_device):
        """Test required keys are reported."""
        with pytest.raises(ConfigurationError, match="junction_capacitance_fF"):
            load_device(write_device(SMALL_DEVICE.replace("junction_capacitance_fF = 240.5", "")))

    def test_loading_depths(self, write_device):
        """Test depths that would make the impedance negative are rejected."""
        text = SMALL_DEVICE + "delta_c = 0.6\ndelta_c2 = 0.5\n"
        with pytest.raises(ConfigurationError, match="delta_c2"):
            load_device(write_device(text))

    def test_cross_field_checks(self, write_device):
        """Test device invariants raise ConfigurationError, not ValidationError."""
        with pytest.raises(ConfigurationError, match="critical current"):
            load_device(write_device("bias_uA = 6.0\n" + SMALL_DEVICE))
        rpm = "\n[rpm]\nL_pH = 230.0\nC_fF = 557.0\nspacing = 4\n"
        with pytest.raises(ConfigurationError, match="spacing"):
            load_device(write_device(SMALL_DEVICE + rpm))

# === ENVIRONMENT TESTS ===

class TestAppConfig:
    """Test cases for environment-driven settings."""

    def test_defaults(self, monkeypatch):
        """Test unset variables use the documented fallbacks."""
        for name in ("TWPAC_OUTPUT_DIR", "TWPAC_WORKERS", "TWPAC_LOG_LEVEL"):
            monkeypatch.delenv(name, raising=False)
        settings = AppConfig()
        assert settings.output_dir.name == "results"
        assert settings.workers == (os.cpu_count() or 1)
        assert settings.log_level == "INFO"

    def test_overrides(self, monkeypatch, tmp_path):
        """Test variables are read on access."""
        monkeypatch.setenv("TWPAC_OUTPUT_DIR", str(tmp_path))
        monkeypatch.setenv("TWPAC_WORKERS", "3")
        monkeypatch.setenv("TWPAC_LOG_LEVEL", "debug")
        settings = AppConfig()
        assert settings.output_dir == tmp_path
        assert settings.workers == 3
        assert settings.log_level == "DEBUG"
        assert settings.is_log_level_valid

    @pytest.mark.parametrize("raw", ["many", "0", "-2"])
    def test_invalid_workers(self, monkeypatch, raw):
        """Test bad worker counts fail on access but not at construction."""
        monkeypatch.setenv("TWPAC_WORKERS", raw)
        settings = AppConfig()
        with pytest.raises(ConfigurationError, match="TWPAC_WORKERS"):
            settings.workers

    def test_invalid_log_level(self, monkeypatch):
        """Test an unknown level is flagged."""
        monkeypatch.setenv("TWPAC_LOG_LEVEL", "chatty")
        assert not AppConfig().is_log_level_valid
