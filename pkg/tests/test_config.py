"""Unit tests for configuration loading and validation."""

import json

import pytest
from zak_dd_sim.config import ConfigValidator, ExperimentConfig, build_config, load_config
from zak_dd_sim.errors import ConfigError


class TestConfigValidator:
    """Test cases for ConfigValidator."""

    @pytest.fixture
    def validator(self):
        """Create a validator instance."""
        return ConfigValidator()

    def test_defaults_are_valid(self, validator):
        """Test the default configuration passes validation."""
        assert validator.validate(ExperimentConfig().to_dict()) == []

    def test_empty_document(self, validator):
        """Test an empty document means all defaults."""
        assert validator.validate(None) == []
        assert validator.validate({}) == []

    def test_unknown_section(self, validator):
        """Test unknown sections are reported."""
        errors = validator.validate({"plotting": {}})
        assert errors == ["Unknown section 'plotting'"]

    def test_unknown_key(self, validator):
        """Test unknown keys are reported with their section."""
        errors = validator.validate({"grid": {"Q": 3}})
        assert errors == ["Unknown key 'Q' in section 'grid'"]

    def test_wrong_type(self, validator):
        """Test a value of the wrong type is reported."""
        errors = validator.validate({"grid": {"M": "sixteen"}})
        assert len(errors) == 1
        assert "Invalid M type: str" in errors[0]

    def test_bool_is_not_int(self, validator):
        """Test booleans are not accepted for integer fields."""
        assert validator.validate({"sweep": {"frames": True}})

    def test_int_accepted_for_float(self, validator):
        """Test integer literals are accepted for float fields."""
        assert validator.validate({"grid": {"T": 2}}) == []

    def test_invalid_grid_value(self, validator):
        """Test a zero delay bin count is reported with its bound."""
        errors = validator.validate({"grid": {"M": 0}})
        assert "Invalid M value: 0 (must be >= 1)" in errors

    def test_crystallization_bounds(self, validator):
        """Test channel spreads beyond one period are rejected."""
        errors = validator.validate({"channel": {"l_max": 16.0, "k_max": 20.0}})
        assert any("l_max" in e for e in errors)
        assert any("k_max" in e for e in errors)

    def test_prefix_must_cover_delay(self, validator):
        """Test a prefix shorter than the maximum delay is rejected."""
        errors = validator.validate({"modem": {"cp_len": 3}})
        assert any("must cover l_max" in e for e in errors)

    def test_rrc_band_needs_oversampling(self, validator):
        """Test the RRC band must fit the sample rate."""
        errors = validator.validate({"grid": {"osr": 1}})
        assert any("Invalid osr value: 1" in e for e in errors)

    def test_unknown_scheme(self, validator):
        """Test unknown link-level schemes are reported."""
        errors = validator.validate({"sweep": {"schemes": ["rect", "fbmc"]}})
        assert errors == ["Invalid scheme: 'fbmc' (must be one of: rect, rrc, ofdm)"]

    def test_non_numeric_snr(self, validator):
        """Test SNR points must be numbers."""
        errors = validator.validate({"sweep": {"snr_db": [6, "high"]}})
        assert any("snr_db" in e for e in errors)

    def test_detector_settings(self, validator):
        """Test detector kind and damping are checked."""
        errors = validator.validate({"detector": {"kind": "ml", "damping": 0.0}})
        assert len(errors) == 2

    def test_line_prefix(self, validator):
        """Test messages carry the source line when known."""
        lines = {("grid",): 1, ("grid", "M"): 2}
        errors = validator.validate({"grid": {"M": 0}}, lines)
        assert errors[0] == "line 2: Invalid M value: 0 (must be >= 1)"


class TestLoadConfig:
    """Test cases for load_config."""

    def test_defaults(self):
        """Test no path gives the default configuration."""
        config = load_config()
        assert config.grid.M == 16
        assert config.channel.P == 4
        assert config.windows.freq_beta == 0.3

    def test_yaml_overrides(self, tmp_path):
        """Test YAML values override defaults and the rest stay default."""
        path = tmp_path / "exp.yaml"
        path.write_text("grid:\n  M: 8\n  N: 8\nmodem:\n  cp_len: 5\n")
        config = load_config(path)
        assert (config.grid.M, config.grid.N) == (8, 8)
        assert config.modem.cp_len == 5
        assert config.grid.osr == 2

    def test_json_accepted(self, tmp_path):
        """Test JSON configurations are accepted."""
        path = tmp_path / "exp.json"
        path.write_text(json.dumps({"sweep": {"snr_db": [0, 5], "frames": 3}}))
        config = load_config(path)
        assert config.sweep.snr_db == [0, 5]
        assert config.sweep.frames == 3

    def test_yaml_errors_are_line_precise(self, tmp_path):
        """Test validation messages point at the offending line."""
        path = tmp_path / "bad.yaml"
        path.write_text("grid:\n  M: 16\n  N: 0\nextra:\n  a: 1\n")
        with pytest.raises(ConfigError) as exc_info:
            load_config(path)
        assert "line 4: Unknown section 'extra'" in exc_info.value.messages

    def test_value_error_line(self, tmp_path):
        """Test range errors also carry the key's line."""
        path = tmp_path / "bad.yaml"
        path.write_text("channel:\n  P: 4\n  seed: -1\n")
        with pytest.raises(ConfigError) as exc_info:
            load_config(path)
        assert exc_info.value.messages == ["line 3: Invalid seed value: -1 (must be >= 0)"]

    def test_unparsable(self, tmp_path):
        """Test a syntax error raises ConfigError."""
        path = tmp_path / "broken.yaml"
        path.write_text("grid: [1, 2\n")
        with pytest.raises(ConfigError, match="Cannot parse"):
            load_config(path)

    def test_missing_file(self, tmp_path):
        """Test a missing file raises ConfigError."""
        with pytest.raises(ConfigError, match="Cannot read"):
            load_config(tmp_path / "absent.yaml")


class TestExperimentConfig:
    """Test cases for ExperimentConfig helpers."""

    def test_digest_stable(self):
        """Test equal settings hash equally and changes alter the hash."""
        assert ExperimentConfig().digest() == build_config({}).digest()
        assert build_config({"grid": {"M": 8}}).digest() != ExperimentConfig().digest()

    def test_to_dict_sections(self):
        """Test the dictionary form has one entry per section."""
        sections = set(ExperimentConfig().to_dict())
        expected = {"grid", "windows", "channel", "modem", "detector", "sweep", "psd", "outputs"}
        assert sections == expected

    def test_sections_documented(self):
        """Test every section dataclass carries its own docstring."""
        config = ExperimentConfig()
        for name in config.to_dict():
            section = type(getattr(config, name))
            assert section.__doc__ and not section.__doc__.startswith(section.__name__ + "(")
