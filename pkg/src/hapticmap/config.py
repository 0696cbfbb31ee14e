"""Run configuration: one INI-style key-value file plus command-line overrides.

Example::

    [stimulus]
    shape = circle
    size = 20

    [sensor]
    noise = 0.05

    [run]
    seed = 3

Every key is optional; missing keys take the library defaults. Sections and
keys that are not recognised are rejected so typos do not go unnoticed.
"""
from __future__ import annotations

import configparser
import dataclasses
import typing
from dataclasses import dataclass, field
from pathlib import Path

from .acoustics import SHAPES, FocalSpotModel, StimulusSpec, make_shape
from .explore import (CHASE_DISTANCE_MM, DEFAULT_THRESHOLD, DEFAULT_WINDOW_MM, PERCEPT_FOOTPRINT_MM,
                      ActionSet)
from .grid import Grid
from .mapping import ScanSpec
from .sensor import SensorModel
from .skin import SkinModel


class ConfigError(ValueError):
    pass


@dataclass
class StimulusConfig:
    shape: str = "point"
    size: float | None = None  # mm; None = the shape's standard size
    stm_frequency: float | None = None  # Hz
    amplitude_scale: float = 1.0
    height: float | None = None  # cm

    def build(self) -> StimulusSpec:
        return make_shape(self.shape, self.size, self.stm_frequency, self.amplitude_scale, self.height)


@dataclass
class ScanConfig:
    rows: int = 9
    cols: int = 9
    spacing: float = 10.0
    center_x: float = 0.0
    center_y: float = 0.0
    map_width: float = 40.0
    map_spacing: float = 0.5
    variance: bool = True

    def build(self) -> ScanSpec:
        return ScanSpec.centered(self.rows, self.cols, self.spacing, (self.center_x, self.center_y))

    def map_grid(self) -> Grid:
        return Grid.centered(self.map_width, self.map_spacing, (self.center_x, self.center_y))


@dataclass
class ExploreConfig:
    start_x: float | None = None  # None = first vertex of the stimulus path
    start_y: float | None = None
    max_steps: int = 40
    stop_radius: float = 10.0
    step: float = 10.0
    window: float = DEFAULT_WINDOW_MM
    threshold: float = DEFAULT_THRESHOLD
    footprint: float = PERCEPT_FOOTPRINT_MM
    chase_distance: float = CHASE_DISTANCE_MM
    map_width: float = 80.0
    map_spacing: float = 1.0

    def start(self, stimulus: StimulusSpec) -> tuple[float, float]:
        if (self.start_x is None) != (self.start_y is None):
            raise ConfigError("explore.start_x and explore.start_y must be given together")
        if self.start_x is None:
            v = stimulus.path.vertices[0]
            return float(v[0]), float(v[1])
        return float(self.start_x), float(self.start_y)

    def actions(self) -> ActionSet:
        return ActionSet(self.step)

    def map_grid(self) -> Grid:
        return Grid.centered(self.map_width, self.map_spacing)


@dataclass
class RunConfig:
    stimulus: StimulusConfig = field(default_factory=StimulusConfig)
    focal: FocalSpotModel = field(default_factory=FocalSpotModel)
    skin: SkinModel = field(default_factory=SkinModel)
    sensor: SensorModel = field(default_factory=SensorModel)
    scan: ScanConfig = field(default_factory=ScanConfig)
    explore: ExploreConfig = field(default_factory=ExploreConfig)
    seed: int = 0
    out: str = "out"

    def as_dict(self) -> dict:
        """Plain nested dict of every parameter, suitable for a manifest."""
        return {
            name: dataclasses.asdict(getattr(self, name))
            for name in ("stimulus", "focal", "skin", "sensor", "scan", "explore")
        } | {"run": {"seed": self.seed, "out": self.out}}

    def validate(self) -> "RunConfig":
        try:
            self.stimulus.build()
            self.scan.build()
            self.scan.map_grid()
            self.explore.actions()
            self.explore.map_grid()
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        return self


_SECTIONS = ("stimulus", "focal", "skin", "sensor", "scan", "explore")


def _convert(raw: str, tp, where: str):
    text = raw.strip()
    args = typing.get_args(tp)
    if type(None) in args:
        if text.lower() in ("", "none", "default"):
            return None
        tp = next(a for a in args if a is not type(None))
    try:
        if tp is bool:
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if tp is int:
            return int(text)
        if tp is float:
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"{where}: cannot read {raw!r} as {tp.__name__}") from None


def _apply(obj, values: dict[str, str], section: str):
    hints = typing.get_type_hints(type(obj))
    names = {f.name for f in dataclasses.fields(obj)}
    changes = {}
    for key, raw in values.items():
        if key not in names:
            raise ConfigError(f"unknown key {section}.{key}; valid keys: {', '.join(sorted(names))}")
        changes[key] = _convert(raw, hints[key], f"{section}.{key}")
    if not changes:
        return obj
    try:
        return dataclasses.replace(obj, **changes)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {exc}") from None


def from_mapping(sections: dict[str, dict[str, str]]) -> RunConfig:
    """Build a config from ``{section: {key: text}}``."""
    cfg = RunConfig()
    for section, values in sections.items():
        if section == "run":
            run = _apply(_RunSection(cfg.seed, cfg.out), values, "run")
            cfg.seed, cfg.out = run.seed, run.out
        elif section in _SECTIONS:
            setattr(cfg, section, _apply(getattr(cfg, section), values, section))
        else:
            raise ConfigError(f"unknown section [{section}]; valid sections: {', '.join(_SECTIONS + ('run',))}")
    if cfg.stimulus.shape.strip().lower().replace("-", "_").replace(" ", "_") not in SHAPES:
        raise ConfigError(f"unknown shape {cfg.stimulus.shape!r}; valid shapes: {', '.join(SHAPES)}")
    return cfg.validate()


@dataclass
class _RunSection:
    seed: int = 0
    out: str = "out"


def parse_overrides(items) -> dict[str, dict[str, str]]:
    """``["sensor.noise=0", ...]`` -> ``{"sensor": {"noise": "0"}}``."""
    out: dict[str, dict[str, str]] = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        section, dot, name = key.strip().partition(".")
        if not sep or not dot or not section or not name:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        out.setdefault(section, {})[name] = value
    return out


def load_config(path=None, overrides=None) -> RunConfig:
    """Read ``path`` (if any), then apply ``overrides`` on top."""
    sections: dict[str, dict[str, str]] = {}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from None
        sections = {s: dict(parser[s]) for s in parser.sections()}
    for section, values in (overrides or {}).items():
        sections.setdefault(section, {}).update(values)
    return from_mapping(sections)


def dump_config(cfg: RunConfig, path) -> Path:
    """Write ``cfg`` back out in the same format ``load_config`` reads."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    for section, values in cfg.as_dict().items():
        parser[section] = {k: "none" if v is None else repr(v) if isinstance(v, float) else str(v)
                           for k, v in values.items()}
    path = Path(path)
    with open(path, "w") as fh:
        parser.write(fh)
    return path
