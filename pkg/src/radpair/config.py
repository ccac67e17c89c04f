"""Run configuration: a sectioned TOML file, validated before any work."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import tomli
import tomli_w

from .dynamics import GAMMA_E, HyperfineCoupling, RadicalPairModel, mhz_to_angular
from .entanglement import LifetimeSettings
from .exceptions import RadpairError, ValidationError
from .magnetometry import MagnetometryParams, field_grid
from .spin_core import SystemLayout


@dataclass(frozen=True)
class ModelSection:
    gamma: float = GAMMA_E
    nuclei: int = 1
    hyperfine_mhz: tuple[float, ...] = (20.0,)
    # electron slot (0 or 1) each nucleus couples to
    hyperfine_electron: tuple[int, ...] = (0,)
    k_S: float = 0.0
    k_T: float = 0.0


@dataclass(frozen=True)
class SweepSection:
    B_min: float = 0.0
    B_max: float = 10.0
    B_step: float = 0.02
    zoom: bool = True
    zoom_halfwidth: float = 0.25
    zoom_step: float = 0.001


@dataclass(frozen=True)
class LifetimeSection:
    threshold: float = 1e-6
    horizon: float = 2000.0
    scan_dt: float = 0.25
    mode: str = "first"


@dataclass(frozen=True)
class MetrologySection:
    snr: float = 1.0
    T_r: float = 1000.0


@dataclass(frozen=True)
class OutputSection:
    directory: str = "out"
    formats: str = "both"


@dataclass(frozen=True)
class RunConfig:
    model: ModelSection = field(default_factory=ModelSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    lifetime: LifetimeSection = field(default_factory=LifetimeSection)
    metrology: MetrologySection = field(default_factory=MetrologySection)
    output: OutputSection = field(default_factory=OutputSection)

    def model_template(self) -> RadicalPairModel:
        m = self.model
        layout = SystemLayout.radical_pair(m.nuclei)
        couplings = tuple(
            HyperfineCoupling(e, 2 + i, mhz_to_angular(a))
            for i, (a, e) in enumerate(zip(m.hyperfine_mhz, m.hyperfine_electron))
        )
        return RadicalPairModel(layout, 0.0, couplings, m.k_S, m.k_T, m.gamma)

    def lifetime_settings(self) -> LifetimeSettings:
        lt = self.lifetime
        return LifetimeSettings(threshold=lt.threshold, horizon=lt.horizon,
                                scan_dt=lt.scan_dt, mode=lt.mode)

    def metrology_params(self) -> MagnetometryParams:
        return MagnetometryParams(self.metrology.snr, self.metrology.T_r, self.model.gamma)

    def field_grid(self):
        s = self.sweep
        return field_grid(s.B_min, s.B_max, s.B_step)

    @property
    def formats(self) -> set[str]:
        f = self.output.formats
        return {"csv", "svg"} if f == "both" else {f}


_SECTION_TYPES = {
    "model": ModelSection,
    "sweep": SweepSection,
    "lifetime": LifetimeSection,
    "metrology": MetrologySection,
    "output": OutputSection,
}


def _coerce(section: str, name: str, kind, value):
    where = f"[{section}].{name}"
    if kind is bool:
        if not isinstance(value, bool):
            raise ValidationError(f"{where} must be true or false")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"{where} must be an integer")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"{where} must be a number")
        if not math.isfinite(value):
            raise ValidationError(f"{where} must be finite")
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ValidationError(f"{where} must be a string")
        return value
    # homogeneous arrays
    if not isinstance(value, list):
        raise ValidationError(f"{where} must be an array")
    item = float if kind == tuple[float, ...] else int
    return tuple(_coerce(section, f"{name}[{i}]", item, v) for i, v in enumerate(value))


_FIELD_TYPES = {
    "float": float, "int": int, "bool": bool, "str": str,
    "tuple[float, ...]": tuple[float, ...], "tuple[int, ...]": tuple[int, ...],
}


def parse_config(data: dict) -> RunConfig:
    """Build and validate a :class:`RunConfig` from TOML-decoded data."""
    unknown = set(data) - set(_SECTION_TYPES)
    if unknown:
        raise ValidationError(f"unknown config section(s): {sorted(unknown)}")
    sections = {}
    for name, cls in _SECTION_TYPES.items():
        raw = data.get(name, {})
        if not isinstance(raw, dict):
            raise ValidationError(f"[{name}] must be a table")
        known = {f.name: f for f in fields(cls)}
        extra = set(raw) - set(known)
        if extra:
            raise ValidationError(f"unknown key(s) in [{name}]: {sorted(extra)}")
        values = {
            k: _coerce(name, k, _FIELD_TYPES[known[k].type], v) for k, v in raw.items()
        }
        sections[name] = cls(**values)
    cfg = RunConfig(**sections)
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    m = cfg.model
    if m.nuclei < 0:
        raise ValidationError("[model].nuclei must be >= 0")
    if len(m.hyperfine_mhz) != m.nuclei or len(m.hyperfine_electron) != m.nuclei:
        raise ValidationError(
            "[model].hyperfine_mhz and hyperfine_electron need one entry per nucleus"
        )
    if any(e not in (0, 1) for e in m.hyperfine_electron):
        raise ValidationError("[model].hyperfine_electron entries must be 0 or 1")
    s = cfg.sweep
    if s.zoom_halfwidth <= 0 or s.zoom_step <= 0:
        raise ValidationError("[sweep] zoom_halfwidth and zoom_step must be > 0")
    if cfg.output.formats not in ("csv", "svg", "both"):
        raise ValidationError("[output].formats must be csv, svg or both")
    try:
        cfg.model_template()
        cfg.lifetime_settings()
        cfg.metrology_params()
        cfg.field_grid()
    except RadpairError as exc:
        raise ValidationError(str(exc)) from None


def load_config(path: str | Path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except tomli.TOMLDecodeError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    return parse_config(data)


def config_to_dict(cfg: RunConfig) -> dict:
    out = {}
    for name in _SECTION_TYPES:
        sec = dataclasses.asdict(getattr(cfg, name))
        out[name] = {k: list(v) if isinstance(v, tuple) else v for k, v in sec.items()}
    return out


def dump_config(cfg: RunConfig) -> str:
    return tomli_w.dumps(config_to_dict(cfg))
