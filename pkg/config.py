import math
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ValidationError, root_validator, validator

from crystal import DIAMOND_LATTICE_A
from errors import ConfigError
from models import Branch, OutputFormat

load_dotenv()


LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

# ===============================
# ENVIRONMENT DEFAULTS
# ===============================

class Settings:
    """Run defaults, overridable through the environment or a .env file"""
    APP_NAME = "xraybell"

    PUMP_KEV = os.getenv("XRAYBELL_PUMP_KEV", "25")
    FRACTION = os.getenv("XRAYBELL_FRACTION", "0.5")
    LATTICE_A = os.getenv("XRAYBELL_LATTICE_A", str(DIAMOND_LATTICE_A))
    MILLER = os.getenv("XRAYBELL_MILLER", "1,1,1")
    THETA_MIN = os.getenv("XRAYBELL_THETA_MIN", "0.01")
    THETA_MAX = os.getenv("XRAYBELL_THETA_MAX", str(math.pi - 0.01))
    SAMPLES = os.getenv("XRAYBELL_SAMPLES", "2000")
    FORMAT = os.getenv("XRAYBELL_FORMAT", "csv")

    LOG_LEVEL = os.getenv("XRAYBELL_LOG_LEVEL", "INFO")
    LOG_FILE = os.getenv("XRAYBELL_LOG_FILE")

    @classmethod
    def validate(cls):
        """Validate critical settings"""
        required = ["PUMP_KEV", "FRACTION", "LATTICE_A", "MILLER", "THETA_MIN", "THETA_MAX", "SAMPLES", "FORMAT"]
        missing = [req for req in required if not getattr(cls, req)]
        if missing:
            raise ValueError(f"Missing required settings: {missing}")
        if cls.LOG_LEVEL.upper() not in LOG_LEVELS:
            raise ValueError(f"Invalid log level: {cls.LOG_LEVEL}")

    @classmethod
    def run_defaults(cls) -> Dict[str, str]:
        return {
            "pump_kev": cls.PUMP_KEV,
            "fraction": cls.FRACTION,
            "lattice_a": cls.LATTICE_A,
            "miller": cls.MILLER,
            "theta_min": cls.THETA_MIN,
            "theta_max": cls.THETA_MAX,
            "samples": cls.SAMPLES,
            "format": cls.FORMAT,
        }


# ===============================
# RUN CONFIGURATION
# ===============================

class RunConfig(BaseModel):
    """One fully resolved CLI invocation"""

    pump_energy_kev: float = 25.0
    signal_fraction: float = 0.5
    lattice_constant_angstrom: float = DIAMOND_LATTICE_A
    miller: Tuple[int, int, int] = (1, 1, 1)
    theta_min: float = 0.01
    theta_max: float = math.pi - 0.01
    samples: int = 2000
    output_format: OutputFormat = OutputFormat.CSV
    output_path: Optional[str] = None
    branches: Tuple[Branch, ...] = (Branch.MINUS,)

    class Config:
        frozen = True

    @validator("miller", pre=True)
    def parse_miller(cls, v):
        if isinstance(v, str):
            parts = [p.strip() for p in v.split(",")]
            try:
                v = tuple(int(p) for p in parts)
            except ValueError:
                raise ValueError(f"Miller indices must look like h,k,l, got {v!r}")
        v = tuple(v)
        if len(v) != 3:
            raise ValueError(f"Miller indices need three integers, got {v!r}")
        if v == (0, 0, 0):
            raise ValueError("Miller indices (0,0,0) do not define a reflection")
        return v

    @validator("branches", pre=True)
    def parse_branches(cls, v):
        if isinstance(v, str):
            choice = v.strip().lower()
            if choice == "both":
                return (Branch.PLUS, Branch.MINUS)
            return (choice,)
        return v

    @validator("output_path", pre=True)
    def blank_means_stdout(cls, v):
        if v is None or (isinstance(v, str) and not v.strip()) or v == "-":
            return None
        return str(v)

    @validator("pump_energy_kev", "lattice_constant_angstrom", "theta_min", "theta_max")
    def positive(cls, v, field):
        if not v > 0:
            raise ValueError(f"{field.name} must be positive, got {v}")
        return v

    @validator("signal_fraction")
    def fraction_in_unit_interval(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError(f"signal fraction must lie in (0, 1), got {v}")
        return v

    @validator("samples")
    def enough_samples(cls, v):
        if v < 2:
            raise ValueError(f"a scan needs at least 2 samples, got {v}")
        return v

    @root_validator(skip_on_failure=True)
    def ordered_range(cls, values):
        lower, upper = values["theta_min"], values["theta_max"]
        if not lower < upper:
            raise ValueError(f"theta_min ({lower}) must be below theta_max ({upper})")
        if not upper < math.pi:
            raise ValueError(f"theta_max ({upper}) must stay below π")
        return values

    @property
    def theta_range(self) -> Tuple[float, float]:
        return self.theta_min, self.theta_max


# config-file / flag key -> RunConfig field
KEY_FIELDS = {
    "pump_kev": "pump_energy_kev",
    "fraction": "signal_fraction",
    "lattice_a": "lattice_constant_angstrom",
    "miller": "miller",
    "theta_min": "theta_min",
    "theta_max": "theta_max",
    "samples": "samples",
    "format": "output_format",
    "out": "output_path",
    "branches": "branches",
}


def read_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """key=value lines; keys mirror the long command-line flags"""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")

    values = {}
    for key, value in dotenv_values(path).items():
        name = key.strip().lower().replace("-", "_")
        if name not in KEY_FIELDS:
            raise ConfigError(f"unknown key '{key}' in {path}")
        if value is None:
            raise ConfigError(f"key '{key}' in {path} has no value")
        values[name] = value
    return values


def build_run_config(
    flags: Mapping[str, Optional[Any]],
    config_path: Optional[Union[str, Path]] = None
) -> RunConfig:
    """Layer defaults < config file < flags; None flags fall through"""
    layered: Dict[str, Any] = dict(Settings.run_defaults())
    if config_path is not None:
        layered.update(read_config_file(config_path))

    for key, value in flags.items():
        if key not in KEY_FIELDS:
            raise ConfigError(f"unknown option '{key}'")
        if value is not None:
            layered[key] = value

    try:
        return RunConfig(**{KEY_FIELDS[key]: value for key, value in layered.items()})
    except ValidationError as e:
        raise ConfigError(str(e)) from e
