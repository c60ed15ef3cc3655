"""Project paths, numerical constants and config.json loading."""

import json
from pathlib import Path
from typing import Any

from sparsetune.logger import LogLevel, error, info, set_level

PACKAGE_DIR = Path(__file__).parent.resolve()
PROJECT_ROOT = PACKAGE_DIR.parent.resolve()

CONFIG_FILE = PROJECT_ROOT / "config.json"
OUTPUT_DIR = PROJECT_ROOT / "output"
PENALTY_CACHE_FILE = OUTPUT_DIR / "penalty_cache.json"

SCHEMA_VERSION = "1.0"
JSON_INDENT = 2

# Support threshold: |beta_j| <= ZERO_TOL counts as zero
ZERO_TOL = 1e-12
# Singular values below RANK_TOL * largest are treated as zero
RANK_TOL = 1e-10
CERTIFICATE_TOL = 1e-8

# Exhaustive benchmarks and full-collection variants
MAX_EXHAUSTIVE_P = 12

# Penalty engine
PEN_ROOT_TOL = 1e-10
PEN_MAX_BRACKET_DOUBLINGS = 200

# Slope heuristic
SLOPE_GRID_SIZE = 60
SLOPE_GRID_SPAN = 1e3

# Segmentation
SEG_PEN_MULTIPLIER = 1.1
LEBARBIER_C1 = 2.0
LEBARBIER_C2 = 5.0

# Config defaults (INPUT schema)
_DEFAULT_CONFIG = {
    "solver": {
        "lassoTol": 1e-10,
        "kktTol": 1e-9,
        "maxSweeps": 100000,
        "alternationTol": 1e-9,
        "maxAlternations": 500,
    },
    "path": {
        "gridSize": 100,
        "gridRatio": 1e-3,
    },
    "linselect": {
        "penMultiplier": 1.1,
    },
    "diagnostics": {
        "maxEnumeration": 3,
    },
    "simulation": {
        "workers": 1,
        "gridSize": 50,
        "gridRatio": 1e-2,
        "cvFolds": 10,
        "magnitude": 2.0,
    },
    "logging": {
        "level": "INFO",
    },
}


def _validate_config(config: dict) -> dict:
    """Validate and normalize full configuration."""

    return {
        "solver": _validate_solver_config(
            config.get("solver"), _DEFAULT_CONFIG["solver"]
        ),
        "path": _validate_path_config(config.get("path"), _DEFAULT_CONFIG["path"]),
        "linselect": _validate_linselect_config(
            config.get("linselect"), _DEFAULT_CONFIG["linselect"]
        ),
        "diagnostics": _validate_diagnostics_config(
            config.get("diagnostics"), _DEFAULT_CONFIG["diagnostics"]
        ),
        "simulation": _validate_simulation_config(
            config.get("simulation"), _DEFAULT_CONFIG["simulation"]
        ),
        "logging": _validate_logging_config(
            config.get("logging"), _DEFAULT_CONFIG["logging"]
        ),
    }


def _section(section_config: Any, name: str) -> dict:
    if not isinstance(section_config, dict):
        if section_config is not None:
            error(f"{name} must be a dictionary, using defaults")
        return {}
    return section_config


def _checked_number(
    section: dict,
    name: str,
    key: str,
    defaults: dict,
    low: float,
    high: float,
    integer: bool = False,
) -> Any:
    """Return section[key] if it is a number in [low, high], else the default."""
    value = section.get(key, defaults[key])
    expected = int if integer else (int, float)
    if (
        isinstance(value, bool)
        or not isinstance(value, expected)
        or not (low <= value <= high)
    ):
        kind = "int" if integer else "number"
        error(
            f"{name}.{key} must be {kind} {low}-{high}, got {value!r}, using {defaults[key]}"
        )
        return defaults[key]
    return value if integer else float(value)


def _validate_solver_config(solver_config: dict | None, defaults: dict) -> dict:
    section = _section(solver_config, "solver")
    return {
        "lassoTol": _checked_number(section, "solver", "lassoTol", defaults, 1e-16, 1e-3),
        "kktTol": _checked_number(section, "solver", "kktTol", defaults, 1e-16, 1e-3),
        "maxSweeps": _checked_number(
            section, "solver", "maxSweeps", defaults, 1, 10**8, integer=True
        ),
        "alternationTol": _checked_number(
            section, "solver", "alternationTol", defaults, 1e-16, 1e-3
        ),
        "maxAlternations": _checked_number(
            section, "solver", "maxAlternations", defaults, 1, 10**6, integer=True
        ),
    }


def _validate_path_config(path_config: dict | None, defaults: dict) -> dict:
    section = _section(path_config, "path")
    return {
        "gridSize": _checked_number(
            section, "path", "gridSize", defaults, 1, 10**5, integer=True
        ),
        "gridRatio": _checked_number(section, "path", "gridRatio", defaults, 1e-12, 0.999),
    }


def _validate_linselect_config(linselect_config: dict | None, defaults: dict) -> dict:
    section = _section(linselect_config, "linselect")
    return {
        "penMultiplier": _checked_number(
            section, "linselect", "penMultiplier", defaults, 1.0, 100.0
        ),
    }


def _validate_diagnostics_config(diag_config: dict | None, defaults: dict) -> dict:
    section = _section(diag_config, "diagnostics")
    return {
        "maxEnumeration": _checked_number(
            section, "diagnostics", "maxEnumeration", defaults, 1, 8, integer=True
        ),
    }


def _validate_simulation_config(sim_config: dict | None, defaults: dict) -> dict:
    section = _section(sim_config, "simulation")
    return {
        "workers": _checked_number(
            section, "simulation", "workers", defaults, 1, 1024, integer=True
        ),
        "gridSize": _checked_number(
            section, "simulation", "gridSize", defaults, 1, 10**5, integer=True
        ),
        "gridRatio": _checked_number(
            section, "simulation", "gridRatio", defaults, 1e-12, 0.999
        ),
        "cvFolds": _checked_number(
            section, "simulation", "cvFolds", defaults, 2, 10**4, integer=True
        ),
        "magnitude": _checked_number(
            section, "simulation", "magnitude", defaults, 1e-6, 1e6
        ),
    }


def _validate_logging_config(logging_config: dict | None, defaults: dict) -> dict:
    section = _section(logging_config, "logging")
    level = section.get("level", defaults["level"])
    if not isinstance(level, str) or level.upper() not in LogLevel.__members__:
        error(
            f"logging.level must be one of {list(LogLevel.__members__)}, got {level!r}, using {defaults['level']}"
        )
        level = defaults["level"]
    return {"level": level.upper()}


def _load_config() -> dict:
    """Load and validate configuration from file, or return defaults on any error."""

    try:
        with open(CONFIG_FILE, encoding="utf8") as f:
            config = json.load(f)
    except FileNotFoundError:
        error(f"Config file not found: {CONFIG_FILE}, using defaults")
        return _validate_config(_DEFAULT_CONFIG)
    except json.JSONDecodeError as e:
        error(f"Failed to parse {CONFIG_FILE}: {e}, using defaults")
        return _validate_config(_DEFAULT_CONFIG)
    except Exception as e:
        error(f"Unexpected error loading {CONFIG_FILE}: {e}, using defaults")
        return _validate_config(_DEFAULT_CONFIG)

    if not isinstance(config, dict):
        error(
            f"config.json must be a dictionary, got {type(config).__name__}, using defaults"
        )
        return _validate_config(_DEFAULT_CONFIG)

    validated = _validate_config(config)
    set_level(validated["logging"]["level"])
    info(f"Loaded config from {CONFIG_FILE}")
    return validated


_config = _load_config()

# Solver settings (guaranteed valid)
LASSO_TOL = _config["solver"]["lassoTol"]
KKT_TOL = _config["solver"]["kktTol"]
MAX_SWEEPS = _config["solver"]["maxSweeps"]
ALTERNATION_TOL = _config["solver"]["alternationTol"]
MAX_ALTERNATIONS = _config["solver"]["maxAlternations"]

# Default lambda grid
PATH_GRID_SIZE = _config["path"]["gridSize"]
PATH_GRID_RATIO = _config["path"]["gridRatio"]

LINSELECT_PEN_MULTIPLIER = _config["linselect"]["penMultiplier"]

MAX_ENUMERATION = _config["diagnostics"]["maxEnumeration"]

SIM_WORKERS = _config["simulation"]["workers"]
SIM_GRID_SIZE = _config["simulation"]["gridSize"]
SIM_GRID_RATIO = _config["simulation"]["gridRatio"]
SIM_CV_FOLDS = _config["simulation"]["cvFolds"]
SIM_MAGNITUDE = _config["simulation"]["magnitude"]


def resolved_config() -> dict:
    """Return a copy of the validated configuration for artifact provenance."""
    return json.loads(json.dumps(_config))
