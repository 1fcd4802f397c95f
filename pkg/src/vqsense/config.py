"""Run configuration: a YAML key/value tree mapped onto nested dataclasses.

Example::

    geometry:
      n_min: 2
      n_max: 5
      radius: 1.0
      bias_mode: perpendicular     # perpendicular | in_plane | custom
      field_angle: 0.0             # in-plane bias direction (radians)
      angular_form: cos            # cos | cos2
      angular_offset: null         # radians; null = default orientation
      bias_angles: null            # custom mode: {N: NxN matrix}
    couplings:                     # required, no silent defaults
      j_ising: 1.0
      j_symmetric: 1.0
      prefactor: 1.0
    ansatz:
      max_depth: 5
      evolution_method: exact      # exact | trotter
      trotter_steps: 1
    encoding:
      kind: uniform                # uniform | weighted_central | custom
      weights: null                # custom only
    measurement:
      rotation_axis: y
      rotation_angle: -1.5707963267948966
      theta0: 0.1
      shift_delta: 1.5707963267948966
      probability_floor: 1.0e-12
    optimizer:
      population_size: null        # null = 4 + floor(3 ln dim)
      initial_sigma: 0.5
      max_evaluations: 20000       # per depth
      fitness_tolerance: 1.0e-12
      new_layer_scale: 3.141592653589793
      freeze_core: false
      workers: 1
    seed: 0
    output_dir: runs/default
"""

from __future__ import annotations

import dataclasses
import math
import typing
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from .ansatz import EVOLUTION_METHODS
from .encoding import ENCODING_KINDS
from .lattice import ANGULAR_FORMS, BIAS_MODES


class ConfigError(ValueError):
    """Invalid or unreadable run configuration."""


@dataclass
class GeometryConfig:
    n_min: int = 2
    n_max: int = 5
    radius: float = 1.0
    bias_mode: str = "perpendicular"
    field_angle: float = 0.0
    angular_form: str = "cos"
    angular_offset: Optional[float] = None
    bias_angles: Optional[dict] = None


@dataclass
class CouplingConfig:
    j_ising: float
    j_symmetric: float
    prefactor: float = 1.0


@dataclass
class AnsatzSettings:
    max_depth: int = 5
    evolution_method: str = "exact"
    trotter_steps: int = 1


@dataclass
class EncodingConfig:
    kind: str = "uniform"
    weights: Optional[list[float]] = None


@dataclass
class MeasurementConfig:
    rotation_axis: str = "y"
    rotation_angle: float = -math.pi / 2
    theta0: float = 0.1
    shift_delta: float = math.pi / 2
    probability_floor: float = 1e-12


@dataclass
class OptimizerConfig:
    population_size: Optional[int] = None
    initial_sigma: float = 0.5
    max_evaluations: int = 20000
    fitness_tolerance: float = 1e-12
    new_layer_scale: float = math.pi
    freeze_core: bool = False
    workers: int = 1


@dataclass
class RunConfig:
    couplings: CouplingConfig
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    ansatz: AnsatzSettings = field(default_factory=AnsatzSettings)
    encoding: EncodingConfig = field(default_factory=EncodingConfig)
    measurement: MeasurementConfig = field(default_factory=MeasurementConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    seed: int = 0
    output_dir: str = "runs/default"

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def qubit_range(self) -> range:
        return range(self.geometry.n_min, self.geometry.n_max + 1)


def _coerce(value: Any, tp: Any, path: str) -> Any:
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin is typing.Union:
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _coerce(value, inner[0], path)
    if dataclasses.is_dataclass(tp):
        return _from_mapping(tp, value, path)
    if tp is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(f"field '{path}': expected true/false, got {value!r}")
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise ConfigError(f"field '{path}': expected integer, got {value!r}")
        try:
            as_float = float(value)
        except ValueError:
            raise ConfigError(f"field '{path}': expected integer, got {value!r}") from None
        if not as_float.is_integer():
            raise ConfigError(f"field '{path}': expected integer, got {value!r}")
        return int(as_float)
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise ConfigError(f"field '{path}': expected number, got {value!r}")
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"field '{path}': expected number, got {value!r}") from None
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"field '{path}': expected string, got {value!r}")
        return value
    if origin is list:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"field '{path}': expected a list, got {value!r}")
        return [_coerce(v, args[0], f"{path}[{i}]") for i, v in enumerate(value)]
    if tp is dict or origin is dict:
        if not isinstance(value, dict):
            raise ConfigError(f"field '{path}': expected a mapping, got {value!r}")
        return dict(value)
    return value


def _from_mapping(cls, data: Any, path: str = ""):
    where = path or "<root>"
    if not isinstance(data, dict):
        raise ConfigError(f"section '{where}': expected a mapping, got {data!r}")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(map(str, data)) - names)
    if unknown:
        raise ConfigError(f"section '{where}': unknown field(s) {', '.join(unknown)}")
    kwargs = {}
    for f in dataclasses.fields(cls):
        sub = f"{path}.{f.name}" if path else f.name
        if f.name in data:
            kwargs[f.name] = _coerce(data[f.name], hints[f.name], sub)
        elif f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
            raise ConfigError(f"missing required field '{sub}'")
    return cls(**kwargs)


def validate(cfg: RunConfig) -> RunConfig:
    g = cfg.geometry
    if g.n_min > g.n_max:
        raise ConfigError(f"field 'geometry': empty qubit range n_min={g.n_min} > n_max={g.n_max}")
    if g.n_min < 2 or g.n_max > 12:
        raise ConfigError("field 'geometry': qubit range must lie within [2, 12]")
    if not g.radius > 0:
        raise ConfigError("field 'geometry.radius': must be positive")
    if g.bias_mode not in BIAS_MODES:
        raise ConfigError(f"field 'geometry.bias_mode': expected one of {BIAS_MODES}")
    if g.angular_form not in ANGULAR_FORMS:
        raise ConfigError(f"field 'geometry.angular_form': expected one of {ANGULAR_FORMS}")
    if g.bias_mode == "custom":
        angles = {int(k): v for k, v in (g.bias_angles or {}).items()}
        missing = [n for n in cfg.qubit_range if n not in angles]
        if missing:
            raise ConfigError(f"field 'geometry.bias_angles': no matrix for N={missing}")
    a = cfg.ansatz
    if a.max_depth < 0:
        raise ConfigError("field 'ansatz.max_depth': must be >= 0")
    if a.evolution_method not in EVOLUTION_METHODS:
        raise ConfigError(f"field 'ansatz.evolution_method': expected one of {EVOLUTION_METHODS}")
    if a.trotter_steps < 1:
        raise ConfigError("field 'ansatz.trotter_steps': must be >= 1")
    e = cfg.encoding
    if e.kind not in ENCODING_KINDS:
        raise ConfigError(f"field 'encoding.kind': expected one of {ENCODING_KINDS}")
    if e.kind == "custom":
        if not e.weights:
            raise ConfigError("field 'encoding.weights': required for custom encoding")
        if g.n_min != g.n_max or len(e.weights) != g.n_min:
            raise ConfigError(
                "field 'encoding.weights': custom weights fix the register size; "
                "set geometry.n_min = geometry.n_max = len(weights)"
            )
        if not any(w != 0 for w in e.weights):
            raise ConfigError("field 'encoding.weights': at least one weight must be nonzero")
    m = cfg.measurement
    if m.rotation_axis.lower() not in ("x", "y", "z"):
        raise ConfigError("field 'measurement.rotation_axis': expected x, y or z")
    if not 0 < m.shift_delta < math.pi:
        raise ConfigError("field 'measurement.shift_delta': must lie in (0, pi)")
    if not m.probability_floor > 0:
        raise ConfigError("field 'measurement.probability_floor': must be positive")
    o = cfg.optimizer
    if o.population_size is not None and o.population_size < 4:
        raise ConfigError("field 'optimizer.population_size': must be >= 4")
    if not o.initial_sigma > 0:
        raise ConfigError("field 'optimizer.initial_sigma': must be positive")
    if o.max_evaluations < (o.population_size or 4):
        raise ConfigError("field 'optimizer.max_evaluations': smaller than the population")
    if o.workers < 1:
        raise ConfigError("field 'optimizer.workers': must be >= 1")
    return cfg


def config_from_dict(data: dict) -> RunConfig:
    return validate(_from_mapping(RunConfig, data))


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark else str(path)
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"{where}: YAML parse error: {problem}") from None
    if data is None:
        raise ConfigError(f"{path}: config file is empty")
    # A persisted run record carries its config under "config".
    if isinstance(data, dict) and "config" in data and "cells" in data:
        data = data["config"]
    try:
        return config_from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)


def save_config(cfg: RunConfig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_config(cfg))
    return path
