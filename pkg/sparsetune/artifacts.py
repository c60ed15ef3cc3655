"""JSON artifact persistence shared by the CLI and the simulation harness."""

import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from sparsetune.logger import error, info
from sparsetune.settings import JSON_INDENT, SCHEMA_VERSION

# Excluded when comparing two artifacts for reproducibility
TIMESTAMP_KEY = "created_at"


def to_jsonable(value: Any) -> Any:
    """Recursively convert numpy containers and scalars to plain JSON types."""
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [to_jsonable(v) for v in items]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        # JSON has no inf/nan literals
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def build_artifact(command: str, config: Dict[str, Any], result: Any) -> Dict[str, Any]:
    """Wrap a result with schema version, resolved configuration and timestamp."""
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": to_jsonable(config),
        TIMESTAMP_KEY: datetime.now(timezone.utc).isoformat(),
        "result": to_jsonable(result),
    }


def strip_timestamp(artifact: Dict[str, Any]) -> Dict[str, Any]:
    """Return the artifact without its timestamp, for byte-level comparisons."""
    return {k: v for k, v in artifact.items() if k != TIMESTAMP_KEY}


def dumps(data: Any) -> str:
    return json.dumps(to_jsonable(data), indent=JSON_INDENT, sort_keys=True)


def load_json_file(path: Path, default: Any = None) -> Any:
    """Load JSON from path or return default on any error."""
    if path.exists():
        try:
            with open(path, "r", encoding="utf8") as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            error(f"Failed to parse JSON from {path}: {e}")
        except Exception as e:
            error(f"Failed to load {path}: {e}")
    return default


def save_json_file(path: Path, data: Any, quiet: bool = False) -> Optional[Path]:
    """Write data as JSON to path; returns the path, or None on failure."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf8") as f:
            f.write(dumps(data))
            f.write("\n")
    except Exception as e:
        error(f"Failed to save {path}: {e}")
        return None
    if not quiet:
        info(f"Saved {path}")
    return path
