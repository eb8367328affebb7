"""
Settings Module - numeric defaults

用途:
- Load data/defaults.yaml once (PyYAML) and validate it (pydantic)
- Hand the active settings to every module through get_settings()
- Let the CLI install overrides for one process run
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml
from pydantic import BaseModel, Field, PositiveFloat, PositiveInt, model_validator

ROOT = Path(__file__).resolve().parents[1]
DEFAULTS_PATH = ROOT / "data" / "defaults.yaml"


class Tolerances(BaseModel):
    exponent: PositiveFloat = 1e-9
    root_cluster: PositiveFloat = 1e-7
    root_check: PositiveFloat = 1e-6
    rank: PositiveFloat = 1e-9
    zero: PositiveFloat = 1e-12
    solve: PositiveFloat = 1e-10
    pairing: PositiveFloat = 1e-10
    lift: PositiveFloat = 1e-8


class SeriesDefaults(BaseModel):
    taylor_depth: int = Field(8, ge=0)
    horizon_span: PositiveFloat = 10.0
    target_gap: PositiveFloat = 8.0


class ChainDefaults(BaseModel):
    jmax: int = Field(6, ge=0)


class OracleDefaults(BaseModel):
    fd_step: PositiveFloat = 0.01
    agreement: PositiveFloat = 1e-4
    quad_theta: PositiveInt = 16
    quad_phi: PositiveInt = 24
    fit_inner: PositiveFloat = 10.0
    fit_outer: PositiveFloat = 1000.0
    fit_points: int = Field(40, ge=2)
    rapid_decay_slope: float = -6.0
    moment: PositiveFloat = 1e-10


class CliDefaults(BaseModel):
    strip: Tuple[float, float] = (-10.0, 10.0)
    lmax: int = Field(4, ge=0)
    workers: PositiveInt = 4


class LoggingDefaults(BaseModel):
    level: str = "INFO"


class Settings(BaseModel):
    tolerances: Tolerances = Tolerances()
    series: SeriesDefaults = SeriesDefaults()
    chains: ChainDefaults = ChainDefaults()
    oracle: OracleDefaults = OracleDefaults()
    cli: CliDefaults = CliDefaults()
    logging: LoggingDefaults = LoggingDefaults()

    @model_validator(mode="after")
    def _check_fit_window(self) -> "Settings":
        if self.oracle.fit_outer <= self.oracle.fit_inner:
            raise ValueError("oracle.fit_outer must exceed oracle.fit_inner")
        return self


@lru_cache(maxsize=1)
def load_defaults(path: Path = DEFAULTS_PATH) -> Settings:
    if not path.exists():
        raise RuntimeError(f"defaults not found: {path}")
    raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    return Settings.model_validate(raw)


_ACTIVE: Optional[Settings] = None


def get_settings() -> Settings:
    """Active settings: overrides if installed, else the YAML defaults."""
    return _ACTIVE if _ACTIVE is not None else load_defaults()


def override_settings(**sections: Dict[str, Any]) -> Settings:
    """
    Install a validated copy of the defaults with some fields replaced.

    Args:
        sections: section name -> {field: value}, e.g. tolerances={"rank": 1e-8}

    Returns:
        the new active Settings
    """
    global _ACTIVE
    data = get_settings().model_dump()
    for name, changes in sections.items():
        if name not in data:
            raise KeyError(f"unknown settings section: {name}")
        data[name].update({k: v for k, v in changes.items() if v is not None})
    _ACTIVE = Settings.model_validate(data)
    return _ACTIVE


def reset_settings() -> None:
    global _ACTIVE
    _ACTIVE = None
