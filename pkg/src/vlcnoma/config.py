"""Experiment configuration: defaults, TOML loading, validation.

Every field has a default matching the standard indoor setup, so an
empty file is a valid config.  Validation errors carry the dotted
field path (e.g. ``noma.tsnr_db``) so the CLI can point at the exact
offending entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields as dc_fields

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

import numpy as np

from .channel import ChannelParams
from .noma import LinkBudget
from .optimizer import SolverConfig

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "PhysicalConfig",
    "NomaConfig",
    "NetworkConfig",
    "MaxminExampleConfig",
    "ReportConfig",
    "load_config",
    "EXPERIMENT_NAMES",
    "NORMALIZED_GAIN_UNIT",
]

EXPERIMENT_NAMES = ("fig2", "fig3", "fig4", "maxmin_example", "network_demo")

#: Channel gains quoted in "normalized" form are in units of 1e-4.
NORMALIZED_GAIN_UNIT = 1e-4


class ConfigError(Exception):
    """Invalid configuration; ``field`` is the dotted path of the bad entry."""

    def __init__(self, field_path: str, message: str) -> None:
        self.field = field_path
        super().__init__(f"{field_path}: {message}")


@dataclass(frozen=True)
class PhysicalConfig:
    vap_height_m: float = 3.0
    user_height_m: float = 0.85
    half_power_semiangle_deg: float = 60.0
    fov_semiangle_deg: float = 32.0
    detector_area_cm2: float = 1.0
    filter_gain: float = 1.0
    refractive_index: float = 1.5
    responsivity_a_per_w: float = 0.4


@dataclass(frozen=True)
class NomaConfig:
    k_users: int = 3
    k_sweep: tuple[int, ...] = (2, 3, 4)
    tsnr_db: tuple[float, ...] = (65.0, 70.0, 75.0, 80.0, 85.0)
    epsilon: tuple[float, ...] = (0.06,)
    epsilon_sweep: tuple[float, ...] = (0.02, 0.06, 0.10)
    qos_targets: tuple[float, ...] = (0.6,)
    gain_scale: str = "normalized"


@dataclass(frozen=True)
class NetworkConfig:
    rows: int = 4
    cols: int = 4
    spacing_m: float = 1.8
    users: int = 40
    bandwidth_hz: float = 2e7
    dedicated_fraction: float = 0.1
    dedicated_cap: float = 0.5
    criterion: str = "sum"
    qos_target: float = 0.0


@dataclass(frozen=True)
class MaxminExampleConfig:
    gains: tuple[float, ...] = (0.293, 0.359, 0.454)
    profiles: tuple[tuple[float, ...], ...] = ((1.0, 1.0, 1.0), (2.0, 1.0, 1.0))
    tsnr_db: float = 70.0
    epsilon: float = 0.05
    oracle_grid: float = 0.005


@dataclass(frozen=True)
class ReportConfig:
    hist_bin_width: float = 0.05
    plots: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "fig2"
    trials: int = 200
    seed: int = 12345
    out_dir: str = "results"
    physical: PhysicalConfig = field(default_factory=PhysicalConfig)
    noma: NomaConfig = field(default_factory=NomaConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    maxmin: MaxminExampleConfig = field(default_factory=MaxminExampleConfig)
    report: ReportConfig = field(default_factory=ReportConfig)

    def channel_params(self) -> ChannelParams:
        p = self.physical
        return ChannelParams(
            area_m2=p.detector_area_cm2 * 1e-4,
            half_power_semiangle=math.radians(p.half_power_semiangle_deg),
            fov_semiangle=math.radians(p.fov_semiangle_deg),
            filter_gain=p.filter_gain,
            refractive_index=p.refractive_index,
            responsivity=p.responsivity_a_per_w,
        )

    def budget(self, tsnr_db: float, epsilon: float) -> LinkBudget:
        return LinkBudget(
            tsnr_db=tsnr_db,
            responsivity=self.physical.responsivity_a_per_w,
            residual_interference=epsilon,
        )

    def gain_unit(self) -> float:
        return NORMALIZED_GAIN_UNIT if self.noma.gain_scale == "normalized" else 1.0

    def qos_vector(self, k_users: int) -> np.ndarray:
        t = self.noma.qos_targets
        if len(t) == 1:
            return np.full(k_users, t[0])
        if len(t) != k_users:
            raise ConfigError(
                "noma.qos_targets",
                f"need 1 or {k_users} entries, got {len(t)}",
            )
        return np.array(t)


# ---------------------------------------------------------------------------
# TOML loading


def _require(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ConfigError(path, message)


def _number(value, path: str) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool),
             path, f"expected a number, got {value!r}")
    return float(value)


def _integer(value, path: str) -> int:
    _require(isinstance(value, int) and not isinstance(value, bool),
             path, f"expected an integer, got {value!r}")
    return int(value)


def _number_list(value, path: str) -> tuple[float, ...]:
    _require(isinstance(value, list) and len(value) > 0,
             path, f"expected a non-empty list of numbers, got {value!r}")
    return tuple(_number(v, path) for v in value)


def _build_section(cls, data: dict, section: str, overrides: dict | None = None):
    """Fill a config dataclass from a TOML table, rejecting unknown keys."""
    known = {f.name for f in dc_fields(cls)}
    kwargs = {}
    for key, raw in data.items():
        _require(key in known, f"{section}.{key}" if section else key,
                 "unknown field")
        kwargs[key] = raw
    if overrides:
        kwargs.update(overrides)
    return kwargs


def _parse_physical(data: dict) -> PhysicalConfig:
    kw = _build_section(PhysicalConfig, data, "physical")
    out = {}
    for key, raw in kw.items():
        path = f"physical.{key}"
        val = _number(raw, path)
        _require(val > 0.0, path, "must be positive")
        out[key] = val
    cfg = PhysicalConfig(**out)
    _require(cfg.vap_height_m > cfg.user_height_m, "physical.vap_height_m",
             "must exceed user_height_m")
    _require(0.0 < cfg.half_power_semiangle_deg < 90.0,
             "physical.half_power_semiangle_deg", "must lie in (0, 90)")
    _require(0.0 < cfg.fov_semiangle_deg < 90.0,
             "physical.fov_semiangle_deg", "must lie in (0, 90)")
    _require(cfg.refractive_index >= 1.0, "physical.refractive_index",
             "must be >= 1")
    return cfg


def _parse_noma(data: dict) -> NomaConfig:
    kw = _build_section(NomaConfig, data, "noma")
    out: dict = {}
    for key, raw in kw.items():
        path = f"noma.{key}"
        if key == "k_users":
            val = _integer(raw, path)
            _require(1 <= val <= 8, path, "must lie in 1..8")
            out[key] = val
        elif key == "k_sweep":
            _require(isinstance(raw, list) and raw, path, "expected a non-empty list")
            vals = tuple(_integer(v, path) for v in raw)
            _require(all(1 <= v <= 8 for v in vals), path, "entries must lie in 1..8")
            out[key] = vals
        elif key in ("tsnr_db", "epsilon", "epsilon_sweep", "qos_targets"):
            vals = _number_list(raw, path)
            if key in ("epsilon", "epsilon_sweep"):
                _require(all(0.0 <= v < 1.0 for v in vals), path,
                         "entries must lie in [0, 1)")
            if key == "qos_targets":
                _require(all(v >= 0.0 for v in vals), path,
                         "entries must be nonnegative")
            out[key] = vals
        elif key == "gain_scale":
            _require(raw in ("physical", "normalized"), path,
                     f"must be 'physical' or 'normalized', got {raw!r}")
            out[key] = raw
    return NomaConfig(**out)


def _parse_solver(data: dict) -> SolverConfig:
    kw = _build_section(SolverConfig, data, "solver")
    out: dict = {}
    for key, raw in kw.items():
        path = f"solver.{key}"
        if key == "max_iterations":
            out[key] = _integer(raw, path)
        else:
            out[key] = _number(raw, path)
    try:
        return SolverConfig(**out)
    except ValueError as exc:
        raise ConfigError("solver", str(exc)) from exc


def _parse_network(data: dict) -> NetworkConfig:
    kw = _build_section(NetworkConfig, data, "network")
    out: dict = {}
    for key, raw in kw.items():
        path = f"network.{key}"
        if key in ("rows", "cols", "users"):
            val = _integer(raw, path)
            _require(val >= 1, path, "must be >= 1")
            out[key] = val
        elif key == "criterion":
            _require(raw in ("sum", "min"), path,
                     f"must be 'sum' or 'min', got {raw!r}")
            out[key] = raw
        elif key == "qos_target":
            val = _number(raw, path)
            _require(val >= 0.0, path, "must be nonnegative")
            out[key] = val
        else:
            val = _number(raw, path)
            _require(val > 0.0, path, "must be positive")
            if key in ("dedicated_fraction", "dedicated_cap"):
                _require(val <= 1.0, path, "must be <= 1")
            out[key] = val
    return NetworkConfig(**out)


def _parse_maxmin(data: dict) -> MaxminExampleConfig:
    kw = _build_section(MaxminExampleConfig, data, "maxmin_example")
    out: dict = {}
    for key, raw in kw.items():
        path = f"maxmin_example.{key}"
        if key == "gains":
            vals = _number_list(raw, path)
            _require(all(v > 0.0 for v in vals), path, "gains must be positive")
            _require(list(vals) == sorted(vals), path,
                     "gains must be sorted ascending")
            out[key] = vals
        elif key == "profiles":
            _require(isinstance(raw, list) and raw, path, "expected a non-empty list")
            profs = []
            for i, prof in enumerate(raw):
                vals = _number_list(prof, f"{path}[{i}]")
                _require(all(v >= 0.0 for v in vals), f"{path}[{i}]",
                         "targets must be nonnegative")
                profs.append(vals)
            out[key] = tuple(profs)
        elif key == "epsilon":
            val = _number(raw, path)
            _require(0.0 <= val < 1.0, path, "must lie in [0, 1)")
            out[key] = val
        elif key == "oracle_grid":
            val = _number(raw, path)
            _require(0.0 < val <= 0.1, path, "must lie in (0, 0.1]")
            out[key] = val
        else:
            out[key] = _number(raw, path)
    cfg = MaxminExampleConfig(**out)
    for i, prof in enumerate(cfg.profiles):
        _require(len(prof) == len(cfg.gains), f"maxmin_example.profiles[{i}]",
                 f"need {len(cfg.gains)} targets to match the gains")
    return cfg


def _parse_report(data: dict) -> ReportConfig:
    kw = _build_section(ReportConfig, data, "report")
    out: dict = {}
    for key, raw in kw.items():
        path = f"report.{key}"
        if key == "plots":
            _require(isinstance(raw, bool), path, f"expected a boolean, got {raw!r}")
            out[key] = raw
        else:
            val = _number(raw, path)
            _require(val > 0.0, path, "must be positive")
            out[key] = val
    return ReportConfig(**out)


def parse_config(data: dict) -> ExperimentConfig:
    """Build a validated ExperimentConfig from a parsed TOML mapping."""
    _require(isinstance(data, dict), "", "config root must be a table")
    known = {"experiment", "physical", "noma", "solver", "network",
             "maxmin_example", "report"}
    for key in data:
        _require(key in known, key, "unknown section")
        _require(isinstance(data[key], dict), key, "must be a table")

    exp = data.get("experiment", {})
    exp_known = {"name", "trials", "seed", "out_dir"}
    for key in exp:
        _require(key in exp_known, f"experiment.{key}", "unknown field")
    name = exp.get("name", "fig2")
    _require(name in EXPERIMENT_NAMES, "experiment.name",
             f"must be one of {', '.join(EXPERIMENT_NAMES)}; got {name!r}")
    trials = _integer(exp.get("trials", 200), "experiment.trials")
    _require(trials >= 1, "experiment.trials", "must be >= 1")
    seed = _integer(exp.get("seed", 12345), "experiment.seed")
    _require(seed >= 0, "experiment.seed", "must be nonnegative")
    out_dir = exp.get("out_dir", "results")
    _require(isinstance(out_dir, str) and out_dir, "experiment.out_dir",
             "must be a non-empty string")

    return ExperimentConfig(
        name=name,
        trials=trials,
        seed=seed,
        out_dir=out_dir,
        physical=_parse_physical(data.get("physical", {})),
        noma=_parse_noma(data.get("noma", {})),
        solver=_parse_solver(data.get("solver", {})),
        network=_parse_network(data.get("network", {})),
        maxmin=_parse_maxmin(data.get("maxmin_example", {})),
        report=_parse_report(data.get("report", {})),
    )


def load_config(path: str) -> ExperimentConfig:
    """Parse and validate a TOML config file."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError("", f"cannot read config file: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("", f"invalid TOML: {exc}") from exc
    return parse_config(data)
