import json

import numpy as np
import pytest

from sparsetune.artifacts import strip_timestamp
from sparsetune.cli import EXIT_FAILURE, EXIT_USAGE, main


@pytest.fixture
def data_csv(tmp_path, instance_factory):
    data, _ = instance_factory(30, 6, k=2, seed=2)
    path = tmp_path / "data.csv"
    np.savetxt(path, np.column_stack([data.X, data.Y]), delimiter=",")
    return path


def _run(capsys, argv):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_kstar(capsys):
    code, out, _ = _run(capsys, ["kstar", "--n", "50", "--p", "5000"])
    assert code == 0
    assert out.strip() == "3"


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["fit-lasso"])
    assert exc.value.code == EXIT_USAGE
    _, err = capsys.readouterr()
    assert json.loads(err.strip().splitlines()[-1])["error"] == "usage_error"


def test_help_exits_0(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    assert "select-linselect" in capsys.readouterr().out


def test_fit_lasso_artifact(capsys, data_csv):
    code, out, _ = _run(
        capsys, ["fit-lasso", "--data", str(data_csv), "--response-col", "-1", "--lambda", "1e9"]
    )
    assert code == 0
    artifact = json.loads(out)
    assert artifact["command"] == "fit-lasso"
    assert artifact["result"]["support"] == []
    assert artifact["config"]["arguments"]["lam"] == 1e9
    assert "solver" in artifact["config"]["settings"]


def test_computational_failure_exits_1(capsys, data_csv):
    code, out, err = _run(
        capsys, ["fit-lasso", "--data", str(data_csv), "--response-col", "-1", "--lambda", "-1"]
    )
    assert code == EXIT_FAILURE
    assert out == ""
    assert json.loads(err.strip().splitlines()[-1])["error"] == "domain_error"


def test_missing_file_is_a_data_error(capsys, tmp_path):
    code, _, err = _run(
        capsys, ["fit-lasso", "--data", str(tmp_path / "nope.csv"), "--response-col", "0", "--path"]
    )
    assert code == EXIT_FAILURE
    assert json.loads(err.strip().splitlines()[-1])["error"] == "malformed_csv"


def test_pen_table(capsys):
    code, out, _ = _run(capsys, ["pen", "--n", "40", "--d", "1", "3", "--delta", "2.0"])
    assert code == 0
    rows = [line.split(",") for line in out.strip().splitlines()]
    assert rows[0] == ["n", "D", "Delta", "pen_delta", "pen"]
    assert [r[1] for r in rows[1:]] == ["1", "3"]
    for row in rows[1:]:
        assert float(row[4]) == pytest.approx(1.1 * float(row[3]))
    assert float(rows[2][3]) > float(rows[1][3])


def test_cv_artifacts_are_reproducible(capsys, data_csv, tmp_path):
    outputs = []
    for name in ("a.json", "b.json"):
        out_file = tmp_path / name
        argv = [
            "select-cv", "--data", str(data_csv), "--response-col", "-1",
            "--seed", "4", "--folds", "5", "--grid-size", "10", "--out", str(out_file),
        ]
        assert _run(capsys, argv)[0] == 0
        outputs.append(strip_timestamp(json.loads(out_file.read_text())))
    assert outputs[0]["result"] == outputs[1]["result"]


def test_linselect_on_a_saved_path(capsys, data_csv, tmp_path):
    path_file = tmp_path / "path.json"
    base = ["--data", str(data_csv), "--response-col", "-1"]
    assert _run(capsys, ["fit-lasso", *base, "--path", "--grid-size", "12", "--out", str(path_file)])[0] == 0
    code, out, _ = _run(capsys, ["select-linselect", *base, "--path-file", str(path_file)])
    assert code == 0
    report = json.loads(out)["result"]
    assert report["method"] == "linselect"
    assert len(report["rows"]) == 12


def test_segment_command(capsys, tmp_path):
    signal = tmp_path / "signal.csv"
    y = np.concatenate([np.zeros(20), 6.0 * np.ones(20)]) + 0.1 * np.random.default_rng(0).standard_normal(40)
    np.savetxt(signal, y)
    code, out, _ = _run(capsys, ["segment", "--signal", str(signal), "--method", "bgh"])
    assert code == 0
    assert 20 in json.loads(out)["result"]["breakpoints"]


def test_slope_command(capsys, tmp_path):
    table = tmp_path / "rss.csv"
    rows = ["dim,rss"] + [f"{d},{1000 - 300 * d if d <= 3 else 100 - (d - 3)}" for d in range(21)]
    table.write_text("\n".join(rows) + "\n")
    code, out, _ = _run(capsys, ["select-slope", "--rss", str(table)])
    assert code == 0
    assert json.loads(out)["result"]["chosen_index"] == 3


def test_simulate_bic_demo(capsys, tmp_path):
    config = tmp_path / "sim.json"
    config.write_text(json.dumps({"n": 30, "reps": 2}))
    samples = tmp_path / "samples.csv"
    code, out, _ = _run(
        capsys,
        ["simulate", "--experiment", "bic-demo", "--seed", "1", "--config", str(config),
         "--workers", "1", "--csv", str(samples)],
    )
    assert code == 0
    result = json.loads(out)["result"]
    assert set(result["samples"]) == {"lasso-bic", "scad-bic", "hard-bic"}
    assert samples.exists()


def test_simulate_rejects_unknown_config_keys(capsys, tmp_path):
    config = tmp_path / "sim.json"
    config.write_text(json.dumps({"setting": {"n": 20, "p": 20}}))
    code, _, err = _run(
        capsys, ["simulate", "--experiment", "1", "--seed", "0", "--config", str(config)]
    )
    assert code == EXIT_FAILURE
    assert json.loads(err.strip().splitlines()[-1])["error"] == "configuration_error"


def test_diagnose_reports_group_compatibility(capsys, data_csv):
    code, out, _ = _run(
        capsys,
        ["diagnose", "--data", str(data_csv), "--response-col", "-1", "--group-size", "2", "--k-max", "2"],
    )
    assert code == 0
    result = json.loads(out)["result"]
    assert result["kappa"] is None
    assert result["kappa_G"]["value"] >= 0.0
    assert set(result["phi_plus"]) == {"1", "2"}
