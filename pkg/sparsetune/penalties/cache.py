"""Thread-safe memo table for solved penalties, with optional JSON persistence."""

import threading
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from sparsetune.artifacts import load_json_file, save_json_file
from sparsetune.logger import debug, info

PenaltyKey = Tuple[str, int, int, float]


class PenaltyCache:
    """Memoizes penalty values keyed by (kind, n, dimension, weight)."""

    def __init__(self, cache_path: Optional[Path] = None):
        self.cache_path = cache_path
        self._values: Dict[PenaltyKey, float] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def __len__(self) -> int:
        with self._lock:
            return len(self._values)

    def get_or_compute(self, key: PenaltyKey, compute: Callable[[], float]) -> float:
        """Return the cached value for key, computing and storing it if absent.

        The computation runs outside the lock; a concurrent duplicate
        computation stores the same value.
        """
        with self._lock:
            if key in self._values:
                self.hits += 1
                return self._values[key]
            self.misses += 1
        value = compute()
        with self._lock:
            return self._values.setdefault(key, value)

    def clear(self) -> None:
        with self._lock:
            self._values.clear()
            self.hits = self.misses = 0

    def entries(self) -> List[Dict[str, Any]]:
        with self._lock:
            items = sorted(self._values.items())
        return [
            {"kind": k[0], "n": k[1], "dim": k[2], "weight": k[3], "value": v}
            for k, v in items
        ]

    def load(self) -> int:
        """Merge entries from the cache file; returns the number loaded."""
        if self.cache_path is None:
            return 0
        rows = load_json_file(self.cache_path, default=[])
        loaded = 0
        with self._lock:
            for row in rows if isinstance(rows, list) else []:
                try:
                    key = (str(row["kind"]), int(row["n"]), int(row["dim"]), float(row["weight"]))
                    self._values[key] = float(row["value"])
                    loaded += 1
                except (KeyError, TypeError, ValueError):
                    debug(f"Skipping malformed penalty cache row: {row}")
        info(f"Loaded {loaded} penalty value(s) from {self.cache_path}")
        return loaded

    def save(self) -> None:
        if self.cache_path is not None:
            save_json_file(self.cache_path, self.entries())


# Shared by every solver call in this process
PENALTY_CACHE = PenaltyCache()
