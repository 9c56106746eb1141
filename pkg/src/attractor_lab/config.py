"""Scenario configuration: TOML with at most one level of tables.

See ``docs/config.md`` for the grammar.  Parsing validates everything a run
needs (types, ranges, referenced files, seeds) so a bad file fails before any
computation or output.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:          # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .spectral import Potential

SCENARIOS = ("basis", "delta", "conservative", "dissipative", "attractor",
             "prequantum", "beables", "parity")
INITIAL_KINDS = ("gaussian", "matrix", "file", "diagonal", "random")
OUTPUT_ENV = "ATTRACTOR_LAB_OUTPUT_DIR"


@dataclass(frozen=True)
class GridConfig:
    x_min: float = -8.0
    x_max: float = 8.0
    n_points: int = 801


@dataclass(frozen=True)
class DynamicsConfig:
    epsilon: float = 0.3
    tau: float = 1.0
    t_max: float = 10.0
    n_steps: int = 200
    stride: int = 10
    noise: str = "averaged"
    n_draws: int = 4096
    path: str = "brownian"
    node_spacing: float = 0.01
    source: str = "exponential"        # or "constant"
    frame: str = "coefficient"
    limit_tol: float = 1e-4


@dataclass(frozen=True)
class FlowConfig:
    eigenvalues: tuple = ()
    beables: tuple = ()
    kappa: float = 1.0
    omega0: tuple = ()
    basin_min: float | None = None
    basin_max: float | None = None
    basin_step: float = 0.01
    t_max: float = 80.0
    n_times: int = 801
    sector: tuple = ()
    ratio: float = 1e3
    squared: bool = False


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    output_dir: str
    seed: int | None = None
    d: int = 6
    potential: Potential | None = None
    grid: GridConfig = field(default_factory=GridConfig)
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    flow: FlowConfig = field(default_factory=FlowConfig)
    initial: dict = field(default_factory=dict)
    source_path: str | None = None

    def summary(self) -> dict:
        out = {"scenario": self.scenario, "d": self.d, "seed": self.seed}
        if self.potential is not None:
            out["potential"] = self.potential.to_mapping()
        return out


_TABLES = {"grid": GridConfig, "dynamics": DynamicsConfig, "flow": FlowConfig}
_TOP = {"scenario", "output_dir", "seed", "d", "potential", "initial"} | set(_TABLES)
_NEEDS_POTENTIAL = {"basis", "delta", "conservative", "dissipative", "attractor", "parity"}
_NEEDS_STATE = {"conservative", "dissipative", "attractor"}


def _table(cls, raw: dict, name: str):
    if not isinstance(raw, dict):
        raise ConfigError(f"[{name}] must be a table")
    known = {f.name: f for f in fields(cls)}
    unknown = set(raw) - set(known)
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {sorted(unknown)}")
    values = {}
    for key, val in raw.items():
        if isinstance(val, dict):
            raise ConfigError(f"[{name}].{key}: nested tables are not allowed")
        default = known[key].default
        if isinstance(default, bool):
            if not isinstance(val, bool):
                raise ConfigError(f"[{name}].{key} must be true or false")
        elif isinstance(default, int):
            if isinstance(val, bool) or not isinstance(val, int):
                raise ConfigError(f"[{name}].{key} must be an integer")
        elif isinstance(default, float) or default is None:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"[{name}].{key} must be a number")
            val = float(val)
        elif isinstance(default, tuple):
            if not isinstance(val, list):
                raise ConfigError(f"[{name}].{key} must be an array")
            val = tuple(tuple(v) if isinstance(v, list) else v for v in val)
        elif isinstance(default, str) and not isinstance(val, str):
            raise ConfigError(f"[{name}].{key} must be a string")
        values[key] = val
    return cls(**values)


def _check_ranges(cfg: ScenarioConfig) -> None:
    g, dyn, fl = cfg.grid, cfg.dynamics, cfg.flow
    if cfg.d < 1:
        raise ConfigError("d must be positive")
    if not g.x_max > g.x_min:
        raise ConfigError("grid needs x_max > x_min")
    if g.n_points < 64:
        raise ConfigError("grid needs at least 64 points")
    for name in ("epsilon", "tau", "t_max"):
        if not getattr(dyn, name) > 0:
            raise ConfigError(f"[dynamics].{name} must be positive")
    if dyn.n_steps < 2 or dyn.stride < 1:
        raise ConfigError("[dynamics] needs n_steps >= 2 and stride >= 1")
    if dyn.noise not in ("averaged", "sampled"):
        raise ConfigError(f"unknown noise mode {dyn.noise!r}")
    if dyn.path not in ("brownian", "frozen"):
        raise ConfigError(f"unknown noise path {dyn.path!r}")
    if dyn.source not in ("exponential", "constant"):
        raise ConfigError(f"unknown source {dyn.source!r}")
    if dyn.frame not in ("coefficient", "interaction"):
        raise ConfigError(f"unknown frame {dyn.frame!r}")
    if dyn.noise == "sampled" and (dyn.n_draws < 2 or dyn.n_draws % 2):
        raise ConfigError("n_draws must be a positive even number")
    if not fl.kappa > 0 or not fl.t_max > 0 or fl.n_times < 3:
        raise ConfigError("[flow] needs kappa > 0, t_max > 0 and n_times >= 3")
    if not fl.ratio >= 1:
        raise ConfigError("[flow].ratio must be at least 1")


def _check_scenario(cfg: ScenarioConfig) -> None:
    s = cfg.scenario
    if s in _NEEDS_POTENTIAL and cfg.potential is None:
        raise ConfigError(f"scenario {s!r} needs a [potential] table")
    if s in ("dissipative", "attractor") and cfg.dynamics.noise == "sampled" and cfg.seed is None:
        raise ConfigError("sampled noise needs a seed")
    if s in _NEEDS_STATE:
        kind = cfg.initial.get("kind")
        if kind not in INITIAL_KINDS:
            raise ConfigError(f"[initial].kind must be one of {INITIAL_KINDS}")
        if kind == "random" and cfg.seed is None:
            raise ConfigError("random initial state needs a seed")
        if kind == "file" and not Path(cfg.initial.get("path", "")).is_file():
            raise ConfigError(f"initial-state file not found: {cfg.initial.get('path')!r}")
        if kind == "matrix" and "re" not in cfg.initial:
            raise ConfigError("matrix initial state needs 're' (and optionally 'im')")
        if kind == "diagonal":
            vals = cfg.initial.get("values")
            if not isinstance(vals, list) or len(vals) != cfg.d:
                raise ConfigError(f"diagonal initial state needs {cfg.d} values")
            if abs(sum(vals) - 1) > 1e-12:
                raise ConfigError("diagonal values must sum to one")
    if s == "prequantum":
        fl = cfg.flow
        if not fl.eigenvalues:
            raise ConfigError("prequantum scenario needs [flow].eigenvalues")
        if not fl.omega0 and (fl.basin_min is None or fl.basin_max is None):
            raise ConfigError("prequantum scenario needs omega0 or a basin range")
    if s == "beables":
        fl = cfg.flow
        if not fl.beables:
            raise ConfigError("beables scenario needs [flow].beables")
        widths = {len(row) for row in fl.beables}
        if len(widths) != 1:
            raise ConfigError("every beable needs the same number of eigenvalues")
        if len(fl.omega0) != len(fl.beables):
            raise ConfigError("omega0 needs one entry per beable")
        if fl.sector and len(fl.sector) != len(fl.beables):
            raise ConfigError("sector needs one entry per beable")


def from_mapping(raw: dict, base_dir: Path | None = None) -> ScenarioConfig:
    raw = copy.deepcopy(raw)
    unknown = set(raw) - _TOP
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    scenario = raw.get("scenario")
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario must be one of {SCENARIOS}, got {scenario!r}")
    out_dir = raw.get("output_dir", f"out/{scenario}")
    if not isinstance(out_dir, str):
        raise ConfigError("output_dir must be a string")
    seed = raw.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ConfigError("seed must be an integer")
    d = raw.get("d", 6)
    if isinstance(d, bool) or not isinstance(d, int):
        raise ConfigError("d must be an integer")
    pot = None
    if "potential" in raw:
        if not isinstance(raw["potential"], dict):
            raise ConfigError("[potential] must be a table")
        try:
            pot = Potential.from_mapping(raw["potential"])
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"[potential]: {exc}") from None
    tables = {name: _table(cls, raw.get(name, {}), name) for name, cls in _TABLES.items()}
    initial = raw.get("initial", {})
    if not isinstance(initial, dict):
        raise ConfigError("[initial] must be a table")
    if initial.get("kind") == "file" and base_dir is not None:
        p = Path(initial.get("path", ""))
        if not p.is_absolute():
            initial["path"] = str(base_dir / p)
    try:
        cfg = ScenarioConfig(scenario, out_dir, seed, d, pot, initial=initial, **tables)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    _check_ranges(cfg)
    _check_scenario(cfg)
    return cfg


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    cfg = from_mapping(read_raw(path), base_dir=path.parent)
    return ScenarioConfig(**{**cfg.__dict__, "source_path": str(path)})


def override(cfg_raw: dict, dotted: str, value) -> dict:
    """Copy of a raw mapping with ``table.key`` (or a top-level key) replaced."""
    out = copy.deepcopy(cfg_raw)
    parts = dotted.split(".")
    if len(parts) == 1:
        out[parts[0]] = value
    elif len(parts) == 2:
        out.setdefault(parts[0], {})
        if not isinstance(out[parts[0]], dict):
            raise ConfigError(f"{parts[0]} is not a table")
        out[parts[0]][parts[1]] = value
    else:
        raise ConfigError("parameters have at most one level of nesting")
    return out


def parse_value(text: str):
    """Interpret a sweep value: integer, float, boolean, else a string."""
    low = text.strip().lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        v = float(text)
        if math.isfinite(v):
            return v
    except ValueError:
        pass
    return text.strip()


def read_raw(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
