"""Experiment configuration: dataclass sections loaded from YAML or JSON and validated."""

import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import yaml

from .channel import PowerProfile
from .errors import ConfigError
from .pulses import WindowKind

logger = logging.getLogger(__name__)

SCHEMES = ("rect", "rrc", "ofdm")
DETECTORS = ("cross_domain", "lmmse")
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class GridSection:
    """Frame geometry."""

    M: int = 16
    N: int = 16
    T: float = 1.0
    osr: int = 2


@dataclass(frozen=True)
class WindowSection:
    """Window kinds used by the ambiguity, basis and channel-matrix subcommands.

    The betas also parameterize the ``rrc`` link-level scheme.
    """

    time_kind: str = "rrc"
    freq_kind: str = "rrc"
    time_beta: float = 0.1
    freq_beta: float = 0.3


@dataclass(frozen=True)
class ChannelSection:
    """Random channel draw; ``l_max`` in units of ``T/M``, ``k_max`` in ``1/(N*T)``."""

    P: int = 4
    l_max: float = 5.0
    k_max: float = 3.0
    fractional: bool = True
    seed: int = 0
    power_profile: str = "uniform"


@dataclass(frozen=True)
class ModemSection:
    """Transmit/receive chain options shared by the Zak-OTFS schemes."""

    cp_len: int = 6
    normalize: bool = True
    periodic_shaping: bool = True


@dataclass(frozen=True)
class DetectorSection:
    """Detector of the link-level sweep and its iteration settings."""

    kind: str = "cross_domain"
    max_iters: int = 10
    damping: float = 0.5
    tol: float = 1e-4


@dataclass(frozen=True)
class SweepSection:
    """SNR sweep of the ``ber`` and ``capacity`` subcommands."""

    snr_db: list[float] = field(default_factory=lambda: [6.0, 10.0, 14.0])
    frames: int = 100
    schemes: list[str] = field(default_factory=lambda: ["rect", "rrc", "ofdm"])


@dataclass(frozen=True)
class PsdSection:
    """Spectrum experiment: Rect and RRC transmit signals on their own grid."""

    M: int = 16
    N: int = 8
    osr: int = 4
    frames: int = 20
    nfft: int = 256
    overlap: float = 0.5
    betas: list[float] = field(default_factory=lambda: [0.1, 0.3])


@dataclass(frozen=True)
class OutputSection:
    """Where tables are written and in which format."""

    directory: str = "results"
    format: str = "csv"


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete experiment configuration."""

    grid: GridSection = field(default_factory=GridSection)
    windows: WindowSection = field(default_factory=WindowSection)
    channel: ChannelSection = field(default_factory=ChannelSection)
    modem: ModemSection = field(default_factory=ModemSection)
    detector: DetectorSection = field(default_factory=DetectorSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    psd: PsdSection = field(default_factory=PsdSection)
    outputs: OutputSection = field(default_factory=OutputSection)

    def to_dict(self) -> dict[str, Any]:
        """Plain nested dictionary of all settings."""
        return asdict(self)

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form of the settings."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


SECTIONS: dict[str, type] = {
    "grid": GridSection,
    "windows": WindowSection,
    "channel": ChannelSection,
    "modem": ModemSection,
    "detector": DetectorSection,
    "sweep": SweepSection,
    "psd": PsdSection,
    "outputs": OutputSection,
}

# (key, message) pairs reported by the per-section checks
Issues = list[tuple[str, str]]


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _one_of(name: str, value: str, allowed: Sequence[str]) -> str:
    return f"Invalid {name}: '{value}' (must be one of: {', '.join(allowed)})"


class ConfigValidator:
    """Validator for raw configuration mappings."""

    def validate(
        self, raw: Any, lines: Optional[dict[tuple[str, ...], int]] = None
    ) -> list[str]:
        """Validate a raw configuration mapping.

        Args:
            raw: Parsed document.
            lines: Source line of every ``(section,)`` and ``(section, key)`` entry.

        Returns:
            List of validation error messages (empty if valid).
        """
        if raw is None:
            return []
        if not isinstance(raw, dict):
            return [f"Configuration must be a mapping, got {type(raw).__name__}"]
        lines = lines or {}
        errors = []

        for name, value in raw.items():
            if name not in SECTIONS:
                errors.append(self._locate(lines, str(name), "", f"Unknown section '{name}'"))
            elif not isinstance(value, dict):
                errors.append(
                    self._locate(lines, name, "", f"Section '{name}' must be a mapping")
                )
            else:
                for key, message in self._validate_types(name, value):
                    errors.append(self._locate(lines, name, key, message))
        if errors:
            return errors

        config = build_config(raw)
        checks = {
            "grid": self._validate_grid,
            "windows": self._validate_windows,
            "channel": self._validate_channel,
            "modem": self._validate_modem,
            "detector": self._validate_detector,
            "sweep": self._validate_sweep,
            "psd": self._validate_psd,
            "outputs": self._validate_outputs,
        }
        for section, check in checks.items():
            for key, message in check(config):
                errors.append(self._locate(lines, section, key, message))
        return errors

    @staticmethod
    def _locate(lines: dict[tuple[str, ...], int], section: str, key: str, message: str) -> str:
        line = lines.get((section, key), lines.get((section,)))
        return f"line {line}: {message}" if line is not None else message

    def _validate_types(self, name: str, values: dict[str, Any]) -> Issues:
        """Check keys and value types of one section against its dataclass defaults."""
        issues = []
        defaults = asdict(SECTIONS[name]())
        for key, value in values.items():
            if key not in defaults:
                issues.append((str(key), f"Unknown key '{key}' in section '{name}'"))
                continue
            expected = defaults[key]
            if isinstance(expected, bool):
                ok = isinstance(value, bool)
            elif isinstance(expected, int):
                ok = isinstance(value, int) and not isinstance(value, bool)
            elif isinstance(expected, float):
                ok = isinstance(value, (int, float)) and not isinstance(value, bool)
            elif isinstance(expected, list):
                ok = isinstance(value, list)
            else:
                ok = isinstance(value, str)
            if not ok:
                issues.append(
                    (
                        key,
                        f"Invalid {key} type: {type(value).__name__} "
                        f"(expected {type(expected).__name__})",
                    )
                )
        return issues

    def _validate_grid(self, config: ExperimentConfig) -> Issues:
        g = config.grid
        issues = []
        for key in ("M", "N", "osr"):
            value = getattr(g, key)
            if value < 1:
                issues.append((key, f"Invalid {key} value: {value} (must be >= 1)"))
        if g.T <= 0:
            issues.append(("T", f"Invalid T value: {g.T} (must be > 0)"))
        return issues

    def _validate_windows(self, config: ExperimentConfig) -> Issues:
        """Validate window kinds and roll-offs, and the RRC band against the sample rate."""
        w = config.windows
        issues = []
        kinds = [k.value for k in WindowKind]
        for key in ("time_kind", "freq_kind"):
            value = getattr(w, key)
            if value not in kinds:
                issues.append((key, _one_of(key, value, kinds)))
        for key in ("time_beta", "freq_beta"):
            value = getattr(w, key)
            if not 0.0 <= value < 1.0:
                issues.append((key, f"Invalid {key} value: {value} (must be in [0, 1))"))
        g = config.grid
        if g.M >= 1 and 0.0 <= w.freq_beta < 1.0:
            m_ext = math.ceil(g.M * (1.0 + w.freq_beta))
            if m_ext > g.M * g.osr:
                message = f"Invalid osr value: {g.osr} (RRC band needs M*osr >= {m_ext})"
                issues.append(("freq_beta", message))
        return issues

    def _validate_channel(self, config: ExperimentConfig) -> Issues:
        """Validate the channel draw, including the crystallization condition."""
        c = config.channel
        g = config.grid
        issues = []
        if c.P < 1:
            issues.append(("P", f"Invalid P value: {c.P} (must be >= 1)"))
        if not 0.0 <= c.l_max < g.M:
            issues.append(("l_max", f"Invalid l_max value: {c.l_max} (must be in [0, M={g.M}))"))
        if not 0.0 <= c.k_max < g.N:
            issues.append(("k_max", f"Invalid k_max value: {c.k_max} (must be in [0, N={g.N}))"))
        if c.seed < 0:
            issues.append(("seed", f"Invalid seed value: {c.seed} (must be >= 0)"))
        profiles = [p.value for p in PowerProfile]
        if c.power_profile not in profiles:
            issues.append(("power_profile", _one_of("power_profile", c.power_profile, profiles)))
        return issues

    def _validate_modem(self, config: ExperimentConfig) -> Issues:
        m = config.modem
        g = config.grid
        issues = []
        if not 0 <= m.cp_len <= g.M * g.N:
            issues.append(("cp_len", f"Invalid cp_len value: {m.cp_len} (must be 0-{g.M * g.N})"))
        elif m.cp_len < config.channel.l_max:
            message = f"Invalid cp_len value: {m.cp_len} (must cover l_max={config.channel.l_max})"
            issues.append(("cp_len", message))
        return issues

    def _validate_detector(self, config: ExperimentConfig) -> Issues:
        d = config.detector
        issues = []
        if d.kind not in DETECTORS:
            issues.append(("kind", _one_of("kind", d.kind, DETECTORS)))
        if d.max_iters < 1:
            issues.append(("max_iters", f"Invalid max_iters value: {d.max_iters} (must be >= 1)"))
        if not 0.0 < d.damping <= 1.0:
            issues.append(("damping", f"Invalid damping value: {d.damping} (must be in (0, 1])"))
        if d.tol <= 0:
            issues.append(("tol", f"Invalid tol value: {d.tol} (must be > 0)"))
        return issues

    def _validate_sweep(self, config: ExperimentConfig) -> Issues:
        s = config.sweep
        issues = []
        if not s.snr_db or not all(_is_number(v) for v in s.snr_db):
            issues.append(("snr_db", "Invalid snr_db: must be a non-empty list of numbers"))
        if s.frames < 1:
            issues.append(("frames", f"Invalid frames value: {s.frames} (must be >= 1)"))
        if not s.schemes:
            issues.append(("schemes", "Invalid schemes: must name at least one scheme"))
        for name in s.schemes:
            if name not in SCHEMES:
                issues.append(("schemes", _one_of("scheme", str(name), SCHEMES)))
        return issues

    def _validate_psd(self, config: ExperimentConfig) -> Issues:
        p = config.psd
        issues = []
        for key in ("M", "N", "osr", "frames"):
            value = getattr(p, key)
            if value < 1:
                issues.append((key, f"Invalid {key} value: {value} (must be >= 1)"))
        if p.nfft < 2:
            issues.append(("nfft", f"Invalid nfft value: {p.nfft} (must be >= 2)"))
        if not 0.0 <= p.overlap < 1.0:
            issues.append(("overlap", f"Invalid overlap value: {p.overlap} (must be in [0, 1))"))
        if not p.betas or not all(_is_number(b) and 0.0 < b < 1.0 for b in p.betas):
            issues.append(("betas", f"Invalid betas: {p.betas} (each must be in (0, 1))"))
        elif p.M >= 1 and math.ceil(p.M * (1.0 + max(p.betas))) > p.M * p.osr:
            issues.append(("osr", f"Invalid osr value: {p.osr} (too small for the RRC band)"))
        return issues

    def _validate_outputs(self, config: ExperimentConfig) -> Issues:
        o = config.outputs
        issues = []
        if o.format not in FORMATS:
            issues.append(("format", _one_of("format", o.format, FORMATS)))
        if not o.directory:
            issues.append(("directory", "Output directory must not be empty"))
        return issues


def build_config(raw: Optional[dict[str, Any]]) -> ExperimentConfig:
    """Build a configuration from a mapping of section mappings; missing values use defaults."""
    raw = raw or {}
    sections = {name: cls(**raw.get(name, {})) for name, cls in SECTIONS.items()}
    return ExperimentConfig(**sections)


def _yaml_lines(text: str) -> dict[tuple[str, ...], int]:
    """1-based source lines of every section and key of a YAML document."""
    lines: dict[tuple[str, ...], int] = {}
    root = yaml.compose(text, Loader=yaml.SafeLoader)
    if not isinstance(root, yaml.MappingNode):
        return lines
    for key_node, value_node in root.value:
        section = str(key_node.value)
        lines[(section,)] = key_node.start_mark.line + 1
        if isinstance(value_node, yaml.MappingNode):
            for sub_key, _ in value_node.value:
                lines[(section, str(sub_key.value))] = sub_key.start_mark.line + 1
    return lines


def load_config(path: Union[str, Path, None] = None) -> ExperimentConfig:
    """Load and validate an experiment configuration.

    ``.json`` files are read as JSON; anything else as YAML (which also accepts JSON).

    Args:
        path: Configuration file, or None for the defaults.

    Returns:
        Validated configuration.

    Raises:
        ConfigError: If the file cannot be parsed or fails validation.
    """
    validator = ConfigValidator()
    if path is None:
        config = ExperimentConfig()
        messages = validator.validate(config.to_dict())
        if messages:
            raise ConfigError(messages)
        return config

    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError([f"Cannot read configuration {path}: {e}"]) from e

    lines: dict[tuple[str, ...], int] = {}
    try:
        if path.suffix.lower() == ".json":
            raw = json.loads(text)
        else:
            raw = yaml.safe_load(text)
            lines = _yaml_lines(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError([f"Cannot parse configuration {path}: {e}"]) from e

    messages = validator.validate(raw, lines)
    if messages:
        raise ConfigError(messages)
    logger.debug(f"Loaded configuration from {path}")
    return build_config(raw)
