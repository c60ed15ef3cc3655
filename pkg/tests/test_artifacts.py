import json

import numpy as np
import pytest

from sparsetune.artifacts import (
    TIMESTAMP_KEY,
    build_artifact,
    dumps,
    load_json_file,
    save_json_file,
    strip_timestamp,
    to_jsonable,
)
from sparsetune.errors import BracketError, ConvergenceError, DataError, SparseTuneError


def test_numpy_values_become_json():
    payload = {"a": np.float64(np.inf), "b": np.arange(3), "c": float("nan"), "d": np.int64(4)}
    assert to_jsonable(payload) == {"a": "inf", "b": [0, 1, 2], "c": None, "d": 4}
    json.loads(dumps(payload))


def test_artifacts_differ_only_by_timestamp():
    first = build_artifact("kstar", {"n": 50}, {"value": 3})
    second = build_artifact("kstar", {"n": 50}, {"value": 3})
    assert TIMESTAMP_KEY in first
    assert strip_timestamp(first) == strip_timestamp(second)
    assert first["schema_version"] == "1.0"


def test_save_and_load(tmp_path):
    path = tmp_path / "out" / "artifact.json"
    assert save_json_file(path, {"x": np.array([1.5, 2.5])}, quiet=True) == path
    assert load_json_file(path) == {"x": [1.5, 2.5]}


def test_load_missing_or_broken_returns_default(tmp_path):
    assert load_json_file(tmp_path / "missing.json", default=[]) == []
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf8")
    assert load_json_file(broken, default={}) == {}


def test_error_payloads():
    err = ConvergenceError("no", 0.5)
    assert err.to_dict() == {"error": "nonconvergence", "message": "no", "violation": 0.5}
    assert BracketError("b", (1, 2)).to_dict()["bracket"] == [1.0, 2.0]
    with pytest.raises(SparseTuneError):
        raise DataError("bad row")
    assert DataError("x").code == "malformed_csv"
