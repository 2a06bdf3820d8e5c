"""Experiment configuration: defaults, presets, flat ``key = value`` files and flag overrides."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

SUBCOMMANDS = ("gain", "cdf-dict", "nmse", "nmse-mu", "rate-los", "rate-icsi", "rate-svd", "nearfield")
ESTIMATORS = ("ls", "nbomp", "omp", "gsomp", "gsomp-ss", "crlb")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key (and line when parsed)."""


@dataclass
class ExperimentConfig:
    """All experiment knobs. Frequencies are stored in Hz, angles in radians.

    ``subcarriers = 0`` lets each scenario derive S (delay-spread rule or LoS
    array diagonal); ``n_sb = m_sb = 0`` selects the automatic partition.
    """

    scenario: str = "nmse"
    rows: int = 100
    cols: int = 100
    carrier: float = 300e9
    bandwidth: float = 40e9
    subcarriers: int = 0
    delay_spread: float = 5e-9
    paths: int = 3
    power_dbm: float = 10.0
    power_dbm_sweep: list[float] = field(default_factory=lambda: [-10.0, -5.0, 0.0, 5.0, 10.0])
    noise_dbm_hz: float = -174.0
    distance: float = 15.0
    snr_db: list[float] = field(default_factory=lambda: [-15.0, -10.0, -5.0, 0.0, 5.0, 10.0])
    estimators: list[str] = field(default_factory=lambda: list(ESTIMATORS))
    trials: int = 100
    seed: int = 7
    n_sb: int = 0
    m_sb: int = 0
    oversampling: int = 4
    training_fraction: float = 0.8
    n_rf: int = 2
    user_antennas: int = 1
    user_oversampling: int = 4
    stride: int = 50
    threshold_rule: str = "adaptive"
    false_alarm: float = 0.05
    atoms_per_path: int = 4
    prune: bool = False
    normalize_score: bool = True
    on_grid: bool = True
    min_separation: int = 4
    element_gain: bool = True
    polar_offset_deg: float = 90.0
    azimuth: float = math.pi / 3
    polar: float = math.pi / 4
    subcarrier_index: int = -1
    distance_factors: list[float] = field(default_factory=lambda: [0.25, 0.5, 1.0, 2.0, 4.0])
    workers: int = 1
    out: str = ""

    def validate(self) -> "ExperimentConfig":
        def need(cond, key, msg):
            if not cond:
                raise ConfigError(f"{key}: {msg}")

        need(self.scenario in SUBCOMMANDS, "scenario", f"unknown scenario {self.scenario!r}")
        need(self.rows >= 1, "rows", "must be >= 1")
        need(self.cols >= 1, "cols", "must be >= 1")
        need(self.carrier > 0, "carrier_ghz", "must be positive")
        need(self.bandwidth > 0, "bandwidth_ghz", "must be positive")
        need(self.bandwidth < 2 * self.carrier, "bandwidth_ghz", "must be below twice the carrier")
        need(self.subcarriers >= 0, "subcarriers", "must be >= 0 (0 = automatic)")
        need(self.delay_spread > 0, "delay_spread_ns", "must be positive")
        need(self.paths >= 1, "paths", "must be >= 1")
        need(self.distance > 0, "distance_m", "must be positive")
        need(len(self.snr_db) > 0, "snr_db", "empty sweep")
        need(len(self.power_dbm_sweep) > 0, "power_dbm_sweep", "empty sweep")
        for e in self.estimators:
            need(e in ESTIMATORS, "estimators", f"unknown estimator {e!r}")
        need(self.trials >= 1, "trials", "must be >= 1")
        need(0 <= self.seed < 2 ** 64, "seed", "must fit in an unsigned 64-bit integer")
        need(self.n_sb >= 0 and self.m_sb >= 0, "n_sb", "must be >= 0")
        need(self.n_sb == 0 or self.rows % self.n_sb == 0, "n_sb", f"must divide rows={self.rows}")
        need(self.m_sb == 0 or self.cols % self.m_sb == 0, "m_sb", f"must divide cols={self.cols}")
        need(self.oversampling >= 1, "oversampling", "must be >= 1")
        need(0 < self.training_fraction <= 1, "training_fraction", "must lie in (0, 1]")
        need(self.n_rf >= 1, "n_rf", "must be >= 1")
        need(self.user_antennas >= 1, "user_antennas", "must be >= 1")
        need(self.user_oversampling >= 1, "user_oversampling", "must be >= 1")
        need(self.stride >= 1, "stride", "must be >= 1")
        need(self.threshold_rule in ("adaptive", "nbeam"), "threshold_rule",
             "must be 'adaptive' or 'nbeam'")
        need(0 < self.false_alarm < 1, "false_alarm", "must lie in (0, 1)")
        need(self.atoms_per_path >= 1, "atoms_per_path", "must be >= 1")
        need(self.min_separation >= 0, "min_separation", "must be >= 0")
        need(abs(self.azimuth) <= math.pi + 1e-12, "azimuth_deg", "must lie in [-180, 180]")
        need(abs(self.polar) <= math.pi / 2 + 1e-12, "polar_deg", "must lie in [-90, 90]")
        need(all(x > 0 for x in self.distance_factors), "distance_factors", "must be positive")
        need(self.workers >= 1, "workers", "must be >= 1")
        return self

    def metadata(self) -> list[tuple[str, str]]:
        """Key/value pairs in file syntax, enough to re-run the experiment."""
        return [(k, format_value(k, getattr(self, attr))) for k, (attr, _, _) in KEYS.items()]


# key -> (attribute, parser, scale applied to the parsed number)
def _int(text):
    try:
        return int(text)
    except ValueError:
        v = float(text)
    if not v.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(v)


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _str(text):
    return text.strip()


def parse_range(text: str) -> list[float]:
    """``a:step:b`` (inclusive) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3:
            raise ValueError(f"range needs start:step:stop, got {text!r}")
        start, step, stop = parts
        if step == 0 or (stop - start) / step < 0:
            raise ValueError(f"empty or infinite range {text!r}")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(n)]
    return [float(p) for p in text.split(",") if p.strip()]


def _names(text):
    return [p.strip() for p in text.split(",") if p.strip()]


KEYS = {
    "rows": ("rows", _int, None),
    "cols": ("cols", _int, None),
    "carrier_ghz": ("carrier", float, 1e9),
    "bandwidth_ghz": ("bandwidth", float, 1e9),
    "subcarriers": ("subcarriers", _int, None),
    "delay_spread_ns": ("delay_spread", float, 1e-9),
    "paths": ("paths", _int, None),
    "power_dbm": ("power_dbm", float, None),
    "power_dbm_sweep": ("power_dbm_sweep", parse_range, None),
    "noise_dbm_hz": ("noise_dbm_hz", float, None),
    "distance_m": ("distance", float, None),
    "snr_db": ("snr_db", parse_range, None),
    "estimators": ("estimators", _names, None),
    "trials": ("trials", _int, None),
    "seed": ("seed", _int, None),
    "n_sb": ("n_sb", _int, None),
    "m_sb": ("m_sb", _int, None),
    "oversampling": ("oversampling", _int, None),
    "training_fraction": ("training_fraction", float, None),
    "n_rf": ("n_rf", _int, None),
    "user_antennas": ("user_antennas", _int, None),
    "user_oversampling": ("user_oversampling", _int, None),
    "stride": ("stride", _int, None),
    "threshold_rule": ("threshold_rule", _str, None),
    "false_alarm": ("false_alarm", float, None),
    "atoms_per_path": ("atoms_per_path", _int, None),
    "prune": ("prune", _bool, None),
    "normalize_score": ("normalize_score", _bool, None),
    "on_grid": ("on_grid", _bool, None),
    "min_separation": ("min_separation", _int, None),
    "element_gain": ("element_gain", _bool, None),
    "polar_offset_deg": ("polar_offset_deg", float, None),
    "azimuth_deg": ("azimuth", float, math.pi / 180),
    "polar_deg": ("polar", float, math.pi / 180),
    "subcarrier_index": ("subcarrier_index", _int, None),
    "distance_factors": ("distance_factors", parse_range, None),
    "workers": ("workers", _int, None),
}


def format_value(key: str, value) -> str:
    scale = KEYS[key][2]
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        if value and isinstance(value[0], str):
            return ",".join(value)
        return ",".join(f"{v:.9g}" for v in value)
    if isinstance(value, float):
        return f"{(value / scale if scale else value):.9g}"
    return str(value)


def convert(key: str, text: str, line: int | None = None):
    where = f" (line {line})" if line is not None else ""
    if key not in KEYS:
        raise ConfigError(f"{key}: unknown key{where}")
    attr, parse, scale = KEYS[key]
    try:
        value = parse(text)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}{where}") from None
    if scale is not None:
        value = value * scale
    return attr, value


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines (``#`` comments) into attribute overrides."""
    out = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {no}: expected 'key = value', got {raw.strip()!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        attr, v = convert(key.replace("-", "_"), value, no)
        out[attr] = v
    return out


# Scenario defaults at full scale and the reduced --desk variants.
SCENARIO_DEFAULTS = {
    "gain": {},
    "cdf-dict": {"rows": 40, "cols": 40, "trials": 1000, "paths": 1, "on_grid": False},
    "nmse": {"rows": 40, "cols": 40},
    "nmse-mu": {"rows": 20, "cols": 20, "user_antennas": 4,
                "estimators": ["ls", "omp", "gsomp", "crlb"]},
    "rate-los": {},
    "rate-icsi": {"paths": 2, "n_rf": 2},
    "rate-svd": {"rows": 100, "cols": 50, "paths": 2, "user_antennas": 2, "n_rf": 2},
    "nearfield": {},
}

DESK_PRESETS = {
    "gain": {},
    "cdf-dict": {"rows": 16, "cols": 16, "subcarriers": 32},
    "nmse": {"rows": 16, "cols": 16, "subcarriers": 32},
    "nmse-mu": {"rows": 8, "cols": 8, "subcarriers": 32},
    "rate-los": {"rows": 32, "cols": 32},
    "rate-icsi": {"rows": 32, "cols": 32, "subcarriers": 32},
    "rate-svd": {"rows": 16, "cols": 8, "subcarriers": 32},
    "nearfield": {"rows": 32, "cols": 32},
}


def build_config(scenario: str, file_text: str | None = None, overrides: dict | None = None,
                 desk: bool = False) -> ExperimentConfig:
    """Defaults < scenario defaults < desk preset < config file < explicit overrides."""
    if scenario not in SUBCOMMANDS:
        raise ConfigError(f"scenario: unknown subcommand {scenario!r}")
    cfg = ExperimentConfig(scenario=scenario)
    layers = [SCENARIO_DEFAULTS[scenario], DESK_PRESETS[scenario] if desk else {}]
    if file_text is not None:
        layers.append(parse_config_text(file_text))
    layers.append(overrides or {})
    for layer in layers:
        for attr, value in layer.items():
            setattr(cfg, attr, list(value) if isinstance(value, list) else value)
    return cfg.validate()


def parse_config(path: str | None = None, scenario: str = "nmse", desk: bool = False,
                 **overrides) -> ExperimentConfig:
    """Load a config file (optional) and apply attribute-level ``overrides``."""
    text = None
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path!r}: {exc.strerror}") from None
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    for k in overrides:
        if k not in known:
            raise ConfigError(f"{k}: unknown key")
    return build_config(scenario, text, overrides, desk)
