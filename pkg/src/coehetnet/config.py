"""Scenario configuration, user-type enum, and JSON config ingestion.

All physical quantities are SI unless the field name says otherwise
(powers in dBW, noise density in dBm/Hz, bandwidth in Hz, lengths in m).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path


class ConfigError(ValueError):
    """Raised on malformed configuration input; message names the field."""


class UserType(IntEnum):
    MACRO = 0
    DIRECT_MICRO = 1
    CRE = 2


USER_TYPES = (UserType.MACRO, UserType.DIRECT_MICRO, UserType.CRE)

NOISE_BANDWIDTH_MODES = ("full_band", "allocation")


@dataclass(frozen=True)
class PowerModelParams:
    """Linear consumption model of one base-station class."""

    n_trx: int
    p0_w: float          # consumption at minimum non-zero output
    delta_p: float       # load-dependent slope
    p_sleep_w: float
    p_max_w: float

    def validate(self, name: str) -> None:
        for f in dataclasses.fields(self):
            if getattr(self, f.name) <= 0:
                raise ConfigError(f"power_model.{name}.{f.name} must be positive")


MACRO_POWER_MODEL = PowerModelParams(n_trx=6, p0_w=130.0, delta_p=4.7, p_sleep_w=75.0, p_max_w=40.0)
MICRO_POWER_MODEL = PowerModelParams(n_trx=2, p0_w=56.0, delta_p=2.6, p_sleep_w=39.0, p_max_w=6.3)


@dataclass(frozen=True)
class ScenarioConfig:
    """Full parameter bundle for one deployment scenario.

    Defaults describe the reference layout: a 1 km disc with one central
    macro BS and ten micro BSs equally spaced on an 0.8 km ring, pure
    path-loss channel, 100 MHz system bandwidth.
    """

    macro_power_dbw: float = 16.0
    micro_power_dbw: float = -4.0
    alpha1: float = 3.5               # macro path-loss exponent
    alpha2: float = 4.0               # micro path-loss exponent
    noise_psd_dbm_hz: float = -173.0
    noise_figure_db: float = 7.0
    total_bandwidth_hz: float = 100e6
    disc_radius_m: float = 1000.0
    ring_radius_m: float = 800.0
    n_micro: int = 10
    n_macro: int = 1
    n_ue: int = 1000
    w_micro: float = 0.5              # fraction of UEs dropped inside micro coverage circles
    bias_db: float = 10.0
    eta: float = 0.2                  # time share handed to range-expanded users
    rho: float = 0.5                  # band share handed to macro users
    rng_seed: int = 1234
    # "allocation" integrates receiver noise over the user's own band slice;
    # it is the convention that reproduces the reference optimization results
    # ("full_band" uses the whole system band instead)
    noise_bandwidth_mode: str = "allocation"
    macro_power_model: PowerModelParams = MACRO_POWER_MODEL
    micro_power_model: PowerModelParams = MICRO_POWER_MODEL

    # -- derived linear-scale helpers -------------------------------------

    @property
    def macro_power_w(self) -> float:
        return 10.0 ** (self.macro_power_dbw / 10.0)

    @property
    def micro_power_w(self) -> float:
        return 10.0 ** (self.micro_power_dbw / 10.0)

    @property
    def noise_psd_w_hz(self) -> float:
        """Noise density including receiver noise figure, in W/Hz."""
        return 10.0 ** ((self.noise_psd_dbm_hz + self.noise_figure_db - 30.0) / 10.0)

    def validate(self) -> None:
        for name in ("w_micro", "eta", "rho"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        for name in ("total_bandwidth_hz", "disc_radius_m", "ring_radius_m"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("n_micro", "n_macro", "n_ue"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if self.bias_db < 0:
            raise ConfigError(f"bias_db must be >= 0, got {self.bias_db}")
        if self.ring_radius_m >= self.disc_radius_m:
            raise ConfigError("ring_radius_m must be smaller than disc_radius_m")
        if self.noise_bandwidth_mode not in NOISE_BANDWIDTH_MODES:
            raise ConfigError(
                f"noise_bandwidth_mode must be one of {NOISE_BANDWIDTH_MODES},"
                f" got {self.noise_bandwidth_mode!r}"
            )
        self.macro_power_model.validate("macro")
        self.micro_power_model.validate("micro")

    def replace(self, **changes) -> "ScenarioConfig":
        cfg = dataclasses.replace(self, **changes)
        cfg.validate()
        return cfg

    # -- JSON round trip ----------------------------------------------------

    def to_dict(self) -> dict:
        d = {
            f.name: getattr(self, f.name)
            for f in dataclasses.fields(self)
            if not f.name.endswith("power_model")
        }
        d["power_model"] = {
            "macro": dataclasses.asdict(self.macro_power_model),
            "micro": dataclasses.asdict(self.micro_power_model),
        }
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


_SCALAR_FIELDS = {
    f.name: f.type for f in dataclasses.fields(ScenarioConfig)
    if not f.name.endswith("power_model")
}
_INT_FIELDS = {"n_micro", "n_macro", "n_ue", "rng_seed"}


def config_from_dict(data: dict) -> ScenarioConfig:
    """Build a validated config from a plain dict (e.g. parsed JSON)."""
    if not isinstance(data, dict):
        raise ConfigError("config document must be a JSON object")
    kwargs = {}
    for key, value in data.items():
        if key == "power_model":
            kwargs.update(_parse_power_model(value))
        elif key in _SCALAR_FIELDS:
            kwargs[key] = _coerce_scalar(key, value)
        else:
            raise ConfigError(f"unknown config field {key!r}")
    cfg = ScenarioConfig(**kwargs)
    cfg.validate()
    return cfg


def _coerce_scalar(key: str, value):
    if key == "noise_bandwidth_mode":
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be a string")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    if key in _INT_FIELDS:
        if int(value) != value:
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return int(value)
    return float(value)


def _parse_power_model(value) -> dict:
    if not isinstance(value, dict):
        raise ConfigError("power_model must be an object with 'macro'/'micro' entries")
    out = {}
    for cls in ("macro", "micro"):
        if cls not in value:
            continue
        entry = value[cls]
        if not isinstance(entry, dict):
            raise ConfigError(f"power_model.{cls} must be an object")
        base = MACRO_POWER_MODEL if cls == "macro" else MICRO_POWER_MODEL
        fields = {f.name for f in dataclasses.fields(PowerModelParams)}
        unknown = set(entry) - fields
        if unknown:
            raise ConfigError(f"unknown field power_model.{cls}.{sorted(unknown)[0]}")
        params = dataclasses.replace(base, **{
            k: (int(v) if k == "n_trx" else float(v)) for k, v in entry.items()
        })
        out[f"{cls}_power_model"] = params
    extra = set(value) - {"macro", "micro"}
    if extra:
        raise ConfigError(f"unknown power_model class {sorted(extra)[0]!r}")
    return out


def load_config(path: str | Path) -> ScenarioConfig:
    """Read a JSON config file; raises ConfigError with a field-level message."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)
