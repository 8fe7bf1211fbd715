"""Run configuration: TOML schema, validation, defaults, and run manifests.

A run is fully described by a ``RunConfig``.  ``load_config`` parses a TOML
file against the documented schema (see README): unknown keys are rejected,
missing keys take the documented defaults, and every physical quantity is
range-checked.  Each command echoes the resolved configuration plus seeds
into a JSON manifest next to its outputs so the run can be reproduced.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    """Invalid or malformed run configuration."""


def _require(cond: bool, field_name: str, message: str):
    if not cond:
        raise ConfigError(f"config field '{field_name}': {message}")


def _positive(value, field_name: str):
    _require(value > 0, field_name, f"must be strictly positive, got {value!r}")


def _non_negative(value, field_name: str):
    _require(value >= 0, field_name, f"must be non-negative, got {value!r}")


@dataclass(frozen=True)
class IonConfig:
    species: str = "U"
    energy_mev: float = 1100.0
    fluence_cm2: float = 1.0e12
    table: str = "U_diamond"

    def __post_init__(self):
        _require(bool(self.species), "ion.species", "must be a non-empty label")
        _positive(self.energy_mev, "ion.energy_mev")
        _non_negative(self.fluence_cm2, "ion.fluence_cm2")


@dataclass(frozen=True)
class TargetConfig:
    nitrogen_ppm: float = 1.0
    a0_nm: float = 0.3567

    def __post_init__(self):
        _non_negative(self.nitrogen_ppm, "target.nitrogen_ppm")
        _positive(self.a0_nm, "target.a0_nm")


@dataclass(frozen=True)
class TrackConfig:
    """Segmented track simulation: cell geometry and MD schedule."""

    segments: int = 10
    cell_nm: tuple = (8.56, 8.56, 2.85)
    timestep_fs: float = 0.2
    temperature_k: float = 300.0
    deposit_fs: float = 50.0
    evolve_fs: float = 2000.0
    quench_fs: float = 5000.0
    boundary_shell_nm: float = 1.0
    boundary_tau_fs: float = 100.0

    def __post_init__(self):
        _require(self.segments >= 1, "track.segments", "need at least one segment")
        _require(len(self.cell_nm) == 3, "track.cell_nm", "expects [x, y, z] in nm")
        for v in self.cell_nm:
            _positive(v, "track.cell_nm")
        _positive(self.timestep_fs, "track.timestep_fs")
        _non_negative(self.temperature_k, "track.temperature_k")
        _positive(self.deposit_fs, "track.deposit_fs")
        _non_negative(self.evolve_fs, "track.evolve_fs")
        _non_negative(self.quench_fs, "track.quench_fs")
        _positive(self.boundary_shell_nm, "track.boundary_shell_nm")
        _positive(self.boundary_tau_fs, "track.boundary_tau_fs")


@dataclass(frozen=True)
class TtmConfig:
    """Electronic subsystem: heat capacity, conductivity, coupling.

    Values are representative for diamond; they are deliberately exposed
    here because measured parameters for the electronically excited state
    are not settled.
    """

    ce_ev_nm3_k: float = 1.5e-3
    kappa_ev_nm_fs_k: float = 1.5e-4
    g_ev_nm3_fs_k: float = 4.5e-5
    grid_dx_nm: float = 0.55
    boundary_t_k: float = 300.0

    def __post_init__(self):
        _positive(self.ce_ev_nm3_k, "ttm.ce_ev_nm3_k")
        _non_negative(self.kappa_ev_nm_fs_k, "ttm.kappa_ev_nm_fs_k")
        _non_negative(self.g_ev_nm3_fs_k, "ttm.g_ev_nm3_fs_k")
        _positive(self.grid_dx_nm, "ttm.grid_dx_nm")
        _positive(self.boundary_t_k, "ttm.boundary_t_k")

    @property
    def diffusivity_nm2_fs(self) -> float:
        return self.kappa_ev_nm_fs_k / self.ce_ev_nm3_k


@dataclass(frozen=True)
class DoseConfig:
    """Delta-ray radial dose kernel settings."""

    r_min_nm: float = 0.3
    f_local: float = 1.0
    quad_points: int = 256
    effective_charge_scale: float = 125.0

    def __post_init__(self):
        _positive(self.r_min_nm, "dose.r_min_nm")
        _require(0 < self.f_local <= 1.0, "dose.f_local", "must be in (0, 1]")
        _require(self.quad_points >= 200, "dose.quad_points",
                 "radial quadrature needs at least 200 nodes")
        _positive(self.effective_charge_scale, "dose.effective_charge_scale")


@dataclass(frozen=True)
class DefectConfig:
    cluster_cutoff_nm: float = 0.26

    def __post_init__(self):
        _positive(self.cluster_cutoff_nm, "defects.cluster_cutoff_nm")


@dataclass(frozen=True)
class AnnealStage:
    temperature_k: float
    duration_s: float

    def __post_init__(self):
        _positive(self.temperature_k, "kmc.schedule.temperature_k")
        _positive(self.duration_s, "kmc.schedule.duration_s")


@dataclass(frozen=True)
class KmcConfig:
    """Vacancy/interstitial kinetics during cool-down and annealing."""

    box_nm: float = 40.0
    vacancy_per_nm: float = 5.0
    interstitial_fraction: float = 0.5
    track_radius_nm: float = 2.0
    vacancy_barrier_ev: float = 2.3
    interstitial_barrier_ev: float = 1.6
    attempt_hz: float = 1.0e13
    capture_radius_nm: float = 0.16
    max_events: int = 20_000_000
    schedule: tuple = (AnnealStage(1073.15, 3600.0), AnnealStage(1273.15, 3600.0))

    def __post_init__(self):
        _positive(self.box_nm, "kmc.box_nm")
        _non_negative(self.vacancy_per_nm, "kmc.vacancy_per_nm")
        _require(0.0 <= self.interstitial_fraction <= 1.0,
                 "kmc.interstitial_fraction", "must be in [0, 1]")
        _positive(self.track_radius_nm, "kmc.track_radius_nm")
        _positive(self.vacancy_barrier_ev, "kmc.vacancy_barrier_ev")
        _positive(self.interstitial_barrier_ev, "kmc.interstitial_barrier_ev")
        _positive(self.attempt_hz, "kmc.attempt_hz")
        _positive(self.capture_radius_nm, "kmc.capture_radius_nm")
        _require(self.max_events > 0, "kmc.max_events", "must be positive")
        _require(len(self.schedule) >= 1, "kmc.schedule", "need at least one stage")


@dataclass(frozen=True)
class ChainConfig:
    conversion: float = 0.175
    capture_radius_nm: float = 2.0
    length_um: float = 10.0
    # nearest-neighbor electron-spin dipolar constant: ~52 kHz at 10 nm
    j0_khz_nm3: float = 5.2e4

    def __post_init__(self):
        _require(0.0 <= self.conversion <= 1.0, "chain.conversion", "must be in [0, 1]")
        _positive(self.capture_radius_nm, "chain.capture_radius_nm")
        _positive(self.length_um, "chain.length_um")
        _positive(self.j0_khz_nm3, "chain.j0_khz_nm3")


@dataclass(frozen=True)
class SeedConfig:
    master: int = 20240601

    def __post_init__(self):
        _require(0 <= self.master < 2**64, "seeds.master", "must fit in 64 bits")


@dataclass(frozen=True)
class RunConfig:
    ion: IonConfig = field(default_factory=IonConfig)
    target: TargetConfig = field(default_factory=TargetConfig)
    track: TrackConfig = field(default_factory=TrackConfig)
    ttm: TtmConfig = field(default_factory=TtmConfig)
    dose: DoseConfig = field(default_factory=DoseConfig)
    defects: DefectConfig = field(default_factory=DefectConfig)
    kmc: KmcConfig = field(default_factory=KmcConfig)
    chain: ChainConfig = field(default_factory=ChainConfig)
    seeds: SeedConfig = field(default_factory=SeedConfig)

    def to_dict(self) -> dict:
        return _as_plain(dataclasses.asdict(self))


_SECTIONS = {f.name: f.type for f in dataclasses.fields(RunConfig)}
_SECTION_TYPES = {
    "ion": IonConfig,
    "target": TargetConfig,
    "track": TrackConfig,
    "ttm": TtmConfig,
    "dose": DoseConfig,
    "defects": DefectConfig,
    "kmc": KmcConfig,
    "chain": ChainConfig,
    "seeds": SeedConfig,
}


def _as_plain(obj):
    if isinstance(obj, dict):
        return {k: _as_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_as_plain(v) for v in obj]
    return obj


def _coerce(value, target_type, path: str):
    if target_type is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"config field '{path}': expected a number, got {value!r}")
        return float(value)
    if target_type is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"config field '{path}': expected an integer, got {value!r}")
        return value
    if target_type is str:
        if not isinstance(value, str):
            raise ConfigError(f"config field '{path}': expected a string, got {value!r}")
        return value
    if target_type is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"config field '{path}': expected an array, got {value!r}")
        return tuple(value)
    return value


def _build_section(cls, data: dict, prefix: str):
    if not isinstance(data, dict):
        raise ConfigError(f"config section '{prefix}' must be a table")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"unknown config key '{prefix}.{unknown[0]}'")
    kwargs = {}
    for name, value in data.items():
        path = f"{prefix}.{name}"
        if cls is KmcConfig and name == "schedule":
            if not isinstance(value, list) or not value:
                raise ConfigError(f"config field '{path}': expected a non-empty "
                                  "array of tables")
            kwargs[name] = tuple(_build_section(AnnealStage, st, path) for st in value)
            continue
        ftype = known[name].type
        target = {"str": str, "float": float, "int": int, "tuple": tuple}.get(
            ftype if isinstance(ftype, str) else getattr(ftype, "__name__", ""), None)
        kwargs[name] = _coerce(value, target, path)
    return cls(**kwargs)


def config_from_dict(data: dict) -> RunConfig:
    """Build a validated RunConfig from a nested plain-dict (TOML layout)."""
    unknown = sorted(set(data) - set(_SECTION_TYPES))
    if unknown:
        raise ConfigError(f"unknown config section '{unknown[0]}'")
    kwargs = {
        name: _build_section(cls, data[name], name)
        for name, cls in _SECTION_TYPES.items()
        if name in data
    }
    return RunConfig(**kwargs)


def load_config(path) -> RunConfig:
    """Load and validate a TOML run configuration file."""
    raw = Path(path).read_bytes()
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: TOML parse error: {exc}") from exc
    return config_from_dict(data)


def apply_overrides(cfg: RunConfig, overrides: dict[str, Any]) -> RunConfig:
    """Apply dotted-key overrides (e.g. {'track.segments': 4}) to a config."""
    data = cfg.to_dict()
    for dotted, value in overrides.items():
        parts = dotted.split(".")
        node = data
        for part in parts[:-1]:
            if part not in node or not isinstance(node[part], dict):
                raise ConfigError(f"unknown config key '{dotted}'")
            node = node[part]
        if parts[-1] not in node:
            raise ConfigError(f"unknown config key '{dotted}'")
        node[parts[-1]] = value
    return config_from_dict(data)


def write_manifest(out_dir, cfg: RunConfig, command: str, extra: dict | None = None) -> Path:
    """Write the JSON manifest that makes a run reproducible."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "config": cfg.to_dict(),
    }
    if extra:
        manifest.update(extra)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


def load_manifest(path) -> RunConfig:
    """Recover the RunConfig from a previously written manifest."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return config_from_dict(data["config"])
