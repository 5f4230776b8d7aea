"""Experiment configuration: defaults, file loading and ``key=value`` overrides."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import tomli

from .errors import ConfigError
from .optimizer import AnnealingSchedule

CONDITIONS = ("uncalibrated", "uniform", "linear", "optimized")


@dataclass(frozen=True)
class GridConfig:
    width: float = 1000.0
    height: float = 1000.0


@dataclass(frozen=True)
class PlumeConfig:
    amplitude: float = 100.0
    sigma_x: float = 50.0
    sigma_y: float = 50.0
    walk_step: float = 5.0


@dataclass(frozen=True)
class MobilityConfig:
    v_min: float = 1.0
    v_max: float = 5.0
    pause_max: int = 5


@dataclass(frozen=True)
class AnnealingConfig:
    initial_temp: float = 0.1
    cooling_rate: float = 0.99
    iterations: int = 500
    proposal_sigma: float = 0.2
    lambda_bounds: tuple = (0.0, 1.0)
    initial_lambda: float = 0.01

    def schedule(self) -> AnnealingSchedule:
        return AnnealingSchedule(**dataclasses.asdict(self))


@dataclass(frozen=True)
class ExperimentConfig:
    """Full parameterisation of a simulated deployment.

    Defaults reproduce the published setup where it is stated (30 sensors,
    20 m range, 1 km square, 50 m plume spread, quadratic drift, 10 x 1000
    steps); the remaining values are modelling choices.
    """

    n_sensors: int = 30
    grid: GridConfig = field(default_factory=GridConfig)
    range: float = 20.0
    steps: int = 1000
    repetitions: int = 10
    degree: int = 2
    drift_init_ranges: tuple = ((0.0, 1.5), (2.0, 3.0), (1.0, 2.0))
    alpha: tuple = (0.002, 0.002, 0.002)
    plume: PlumeConfig = field(default_factory=PlumeConfig)
    mobility: MobilityConfig = field(default_factory=MobilityConfig)
    annealing: AnnealingConfig = field(default_factory=AnnealingConfig)
    conditions: tuple = CONDITIONS
    sizes: tuple = (5, 10, 20, 30, 40, 50)
    training_steps: int = 200
    training_noise: float = 0.0
    shared_lambda: float | None = None
    noise_std: float = 0.0
    table_cap: int | None = 256
    anchor_points: int = 11
    x_max_factor: float = 2.0
    staleness: str = "reciprocal"
    staleness_rate: float = 0.01
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.n_sensors < 1:
            raise ConfigError("n_sensors must be >= 1")
        if self.steps < 1 or self.repetitions < 1:
            raise ConfigError("steps and repetitions must be >= 1")
        if self.degree < 1:
            raise ConfigError("degree must be >= 1")
        if len(self.drift_init_ranges) != self.degree + 1:
            raise ConfigError("drift_init_ranges needs one (low, high) pair per coefficient")
        if len(self.alpha) != self.degree + 1:
            raise ConfigError("alpha needs one rate per coefficient")
        for pair in self.drift_init_ranges:
            if len(pair) != 2 or pair[0] > pair[1]:
                raise ConfigError(f"bad drift range {pair!r}")
        if not self.range > 0:
            raise ConfigError("range must be positive")
        if self.grid.width <= 0 or self.grid.height <= 0:
            raise ConfigError("grid must have positive extent")
        if self.plume.amplitude <= 0 or self.plume.sigma_x <= 0 or self.plume.sigma_y <= 0:
            raise ConfigError("plume amplitude and spreads must be positive")
        if not 0 < self.mobility.v_min <= self.mobility.v_max or self.mobility.pause_max < 0:
            raise ConfigError("mobility needs 0 < v_min <= v_max and pause_max >= 0")
        if self.x_max_factor < 1:
            raise ConfigError("x_max_factor must be >= 1 so the range covers the plume peak")
        if self.table_cap is not None and self.table_cap < self.degree + 1:
            raise ConfigError("table_cap must leave room for a fit")
        if self.anchor_points < 0:
            raise ConfigError("anchor_points must be >= 0")
        if self.training_steps < self.degree + 2:
            raise ConfigError("training_steps too short for the polynomial degree")
        if self.shared_lambda is not None and self.shared_lambda < 0:
            raise ConfigError("shared_lambda must be >= 0")
        if self.staleness not in ("reciprocal", "exponential"):
            raise ConfigError(f"unknown staleness kind {self.staleness!r}")
        if not self.sizes or min(self.sizes) < 1:
            raise ConfigError("sizes must be non-empty positive counts")
        bad = set(self.conditions) - set(CONDITIONS)
        if bad:
            raise ConfigError(f"unknown conditions {sorted(bad)}")
        self.annealing.schedule()

    @property
    def x_max(self) -> float:
        return self.x_max_factor * self.plume.amplitude

    def to_dict(self) -> dict:
        return _plain(dataclasses.asdict(self))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        return _build(cls, data)

    def with_overrides(self, overrides) -> "ExperimentConfig":
        """Apply ``key=value`` strings; nested fields use dotted keys like ``plume.amplitude``."""
        data = self.to_dict()
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"override {item!r} is not key=value")
            key, raw = item.split("=", 1)
            _assign(data, key.strip().split("."), _parse_value(raw.strip()))
        return ExperimentConfig.from_dict(data)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _freeze(value):
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    return value


def _build(cls, data):
    if not isinstance(data, dict):
        raise ConfigError(f"expected a table for {cls.__name__}, got {data!r}")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    kwargs = {}
    for name, value in data.items():
        default = known[name].default_factory() if known[name].default_factory is not dataclasses.MISSING else None
        if dataclasses.is_dataclass(default):
            kwargs[name] = _build(type(default), value)
        elif isinstance(known[name].default, tuple) and not isinstance(value, (list, tuple)):
            kwargs[name] = (value,)
        else:
            kwargs[name] = _freeze(value)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def _assign(data, path, value):
    node = data
    for part in path[:-1]:
        if part not in node or not isinstance(node[part], dict):
            raise ConfigError(f"unknown config section {part!r}")
        node = node[part]
    if path[-1] not in node:
        raise ConfigError(f"unknown config key {'.'.join(path)!r}")
    node[path[-1]] = value


def _parse_value(raw: str):
    if raw.lower() in ("none", "null"):
        return None
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        pass
    if "," in raw:
        return [_parse_value(part.strip()) for part in raw.split(",")]
    return raw


def load_config(path=None, overrides=()) -> ExperimentConfig:
    """Defaults, then the file at ``path`` (TOML or JSON), then ``overrides``."""
    config = ExperimentConfig()
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            data = json.loads(text) if path.suffix == ".json" else tomli.loads(text)
        except (json.JSONDecodeError, tomli.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
        if "experiment" in data and "config" in data:
            # a results summary: reuse the resolved config it embeds
            data = data["config"]
        merged = config.to_dict()
        _merge(merged, data)
        config = ExperimentConfig.from_dict(merged)
    return config.with_overrides(overrides)


def _merge(base, update):
    for key, value in update.items():
        if key not in base:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            _merge(base[key], value)
        else:
            base[key] = value
