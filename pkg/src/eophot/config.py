"""Scenario configuration: a flat key-path view of TOML files over shipped defaults."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .devices import DriveWaveform, MziCalibration, PcCalibration, Ringing
from .source import CoincidenceSetup, DetectorModel, SourceModel

__all__ = ["SCENARIOS", "ConfigError", "ScenarioConfig", "load_defaults", "load_config", "flatten"]

SCENARIOS = ("switch_response", "fringes", "fast_hom", "pc_scan", "feedback")
SHARED_SECTIONS = ("mzi", "drive", "pc", "source", "detector1", "detector2", "coincidence")
AUTO_KEYS = ("source.max_overlap", "source.double_pair_prob")
INTEGER_KEYS = ("pc.stages", "feedback.runs", "feedback.drift_runs", "feedback.drift_every",
                "feedback.drift_events", "feedback.max_iters")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name
        self.message = message


def flatten(tree: dict, prefix: str = "") -> dict:
    out = {}
    for key, value in tree.items():
        path = f"{prefix}.{key}" if prefix else key
        if isinstance(value, dict):
            out.update(flatten(value, path))
        else:
            out[path] = value
    return out


def load_defaults() -> dict:
    text = resources.files("eophot").joinpath("defaults.toml").read_text()
    return flatten(tomllib.loads(text))


def _known(key: str, defaults: dict) -> bool:
    if key in defaults:
        return True
    head, _, rest = key.partition(".")
    return head in SCENARIOS and rest in defaults and rest.split(".")[0] in SHARED_SECTIONS


def _check_value(key: str, value):
    bare = key.split(".", 1)[1] if key.split(".")[0] in SCENARIOS and key.count(".") >= 2 else key
    if value == "auto":
        if bare not in AUTO_KEYS:
            raise ConfigError(key, '"auto" is only allowed for ' + ", ".join(AUTO_KEYS))
        return
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(key, "value must be finite")
    if key in INTEGER_KEYS or bare in INTEGER_KEYS:
        if int(value) != value:
            raise ConfigError(key, "expected an integer")


def load_config(path: str | Path | None = None) -> dict:
    """Defaults merged with the overrides in ``path`` (flat key paths)."""
    values = load_defaults()
    if path is None:
        return values
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {p}: {exc.strerror}") from None
    try:
        user = flatten(tomllib.loads(text))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"invalid TOML: {exc}") from None
    for key, value in user.items():
        if not _known(key, values):
            raise ConfigError(key, "unknown configuration key")
        _check_value(key, value)
    values.update(user)
    return values


@dataclass
class ScenarioConfig:
    """Resolved parameters for one scenario run."""

    scenario: str
    values: dict = field(default_factory=load_defaults)
    seed: int = 0
    out_dir: str | Path | None = None
    noise: bool = True

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError("scenario", f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed", "seed must be an unsigned 64-bit integer")
        for key, value in self.values.items():
            _check_value(key, value)

    @classmethod
    def from_file(cls, scenario: str, path=None, **kw) -> "ScenarioConfig":
        return cls(scenario, load_config(path), **kw)

    def get(self, key: str):
        """Shared key with the scenario override applied, or a scenario key."""
        scoped = f"{self.scenario}.{key}"
        if scoped in self.values:
            return self.values[scoped]
        if key in self.values:
            return self.values[key]
        raise ConfigError(scoped, "missing configuration key")

    def num(self, key: str) -> float:
        v = self.get(key)
        if v == "auto":
            raise ConfigError(f"{self.scenario}.{key}", '"auto" not resolved')
        return float(v)

    def integer(self, key: str) -> int:
        return int(self.get(key))

    def with_values(self, **overrides) -> "ScenarioConfig":
        """Copy with ``section__key=value`` style overrides applied at scenario scope."""
        values = dict(self.values)
        for k, v in overrides.items():
            values[f"{self.scenario}.{k.replace('__', '.')}"] = v
        return ScenarioConfig(self.scenario, values, self.seed, self.out_dir, self.noise)

    # model builders; constructor errors are re-raised naming the section

    def _build(self, section, fn):
        try:
            return fn()
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{self.scenario}.{section}", str(exc)) from None

    def mzi(self) -> MziCalibration:
        return self._build("mzi", lambda: MziCalibration(
            self.num("mzi.v_cross"), self.num("mzi.v_balanced"), self.num("mzi.extinction_visibility")))

    def ringing(self) -> Ringing | None:
        amp = self.num("drive.ringing_amplitude")
        if amp == 0:
            return None
        return self._build("drive", lambda: Ringing(
            amp, self.num("drive.ringing_frequency"), self.num("drive.ringing_damping")))

    def pc(self) -> PcCalibration:
        return self._build("pc", lambda: PcCalibration(
            self.num("pc.gain_x"), self.num("pc.gain_z"), self.num("pc.offset_z"), self.integer("pc.stages")))

    def source(self, **resolved) -> SourceModel:
        def arg(name):
            if name in resolved:
                return resolved[name]
            return self.num(f"source.{name}")

        return self._build("source", lambda: SourceModel(
            arg("rep_rate"), arg("pair_prob"), arg("double_pair_prob"), arg("center_wavelength"),
            arg("filter_fwhm"), arg("max_overlap")))

    def detector(self, which: int) -> DetectorModel:
        s = f"detector{which}"
        return self._build(s, lambda: DetectorModel(
            self.num(f"{s}.efficiency"), self.num(f"{s}.dark_rate"), self.num(f"{s}.jitter_fwhm")))

    def coincidence(self, integration_time: float | None = None) -> CoincidenceSetup:
        t = self.num("integration_time") if integration_time is None else integration_time
        if t <= 0:
            raise ConfigError(f"{self.scenario}.integration_time", "must be > 0")
        return self._build("coincidence", lambda: CoincidenceSetup(
            self.num("coincidence.window"), t,
            (self.num("coincidence.channel_loss_1"), self.num("coincidence.channel_loss_2"))))

    def sweep(self, prefix: str, start_key: str | None = None, stop_key: str | None = None):
        """Inclusive sweep ``start, start + step, ... <= stop``."""
        import numpy as np

        start = self.num(start_key or f"{prefix}_start")
        stop = self.num(stop_key or f"{prefix}_stop")
        step = self.num(f"{prefix}_step")
        if step <= 0:
            raise ConfigError(f"{self.scenario}.{prefix}_step", "sweep step must be > 0")
        if stop < start:
            raise ConfigError(f"{self.scenario}.{prefix}_stop", "sweep stop must be >= start")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return start + step * np.arange(n)

    def waveform(self, kind: str, levels, **kw) -> DriveWaveform:
        return self._build("drive", lambda: DriveWaveform(
            kind, tuple(levels), rise_time=self.num("drive.rise_time"), ringing=self.ringing(), **kw))
