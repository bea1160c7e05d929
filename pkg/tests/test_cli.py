import csv
import json

import numpy as np
import pytest

from irrlangevin.cli import main, validate_config
from irrlangevin.potentials import InputError


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_validate_config_defaults():
    cfg, notes = validate_config({})
    assert cfg["scenario"] == "double_well"
    assert cfg["beta"] == 0.1
    assert cfg["seed"] == 0
    assert notes == []


def test_validate_config_warnings_and_errors():
    cfg, notes = validate_config({"deltas": [10.0, 1.0]})
    assert cfg["deltas"] == [1.0, 10.0]
    assert any("reordered" in n for n in notes)
    _, notes = validate_config({"deltas": [300.0]})
    assert any("capped" in n for n in notes)
    with pytest.raises(InputError):
        validate_config({"scenario": "nope"})
    with pytest.raises(InputError):
        validate_config({"beta": -1})
    with pytest.raises(InputError):
        validate_config({"deltas": [-2.0]})


def test_scenario_command_json(capsys):
    assert main(["scenario", "--scenario", "double_well", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["name"] == "double_well"
    kinds = sorted(c["kind"] for c in doc["critical_points"])
    assert kinds == ["minimum", "minimum", "saddle"]


def test_graph_command_json(capsys):
    assert main(["graph", "show", "--scenario", "double_well", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [e["id"] for e in doc["edges"]] == ["I1", "I2", "I3"]
    assert doc["z_max"] == 4.0


def test_simulate_writes_trajectory_csv(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    rc = main(["simulate", "--scenario", "bowl", "--t", "1.0",
               "--thin", "10", "--seed", "4", "--out", str(out)])
    assert rc == 0
    rows = _read_csv(out)
    assert list(rows[0]) == ["t", "x", "y"]
    assert len(rows) == 101
    assert float(rows[0]["x"]) == 1.0
    # floats carry 17 significant digits
    assert any(len(r["x"].replace("-", "").replace(".", "")) >= 16
               for r in rows[1:])


def test_simulate_byte_determinism(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        main(["simulate", "--scenario", "bowl", "--t", "0.5",
              "--seed", "9", "--out", str(out)])
    assert a.read_bytes() == b.read_bytes()


def test_exit_code_invalid_input(capsys):
    assert main(["scenario", "--scenario", "nope"]) == 2
    assert "error:" in capsys.readouterr().err


def test_exit_code_numerical_failure(tmp_path, capsys):
    rc = main(["simulate", "--scenario", "bowl", "--delta", "100",
               "--dt", "1e-3", "--t", "50", "--out",
               str(tmp_path / "x.csv")])
    assert rc == 3
    assert "numerical failure" in capsys.readouterr().err


def test_config_file_with_flag_override(tmp_path, capsys):
    cfgfile = tmp_path / "run.ini"
    cfgfile.write_text("[run]\nscenario = bowl\nseed = 7\n")
    assert main(["--config", str(cfgfile), "scenario", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["name"] == "bowl"
    # the flag wins over the file
    assert main(["--config", str(cfgfile), "scenario",
                 "--scenario", "double_well", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["name"] == "double_well"


def test_missing_config_file():
    assert main(["--config", "/does/not/exist.ini", "scenario"]) == 2


def test_coefficients_csv_schema(tmp_path):
    out = tmp_path / "coef.csv"
    rc = main(["coefficients", "--scenario", "bowl", "--grid", "64",
               "--out", str(out)])
    assert rc == 0
    rows = _read_csv(out)
    assert list(rows[0]) == ["edge", "z", "T", "A_hat", "M", "f_hat",
                             "drift", "diffusion_var"]
    assert len(rows) == 64
    assert all(r["edge"] == "I1" for r in rows)
    z = np.array([float(r["z"]) for r in rows])
    T = np.array([float(r["T"]) for r in rows])
    np.testing.assert_allclose(T, 2 * np.pi, rtol=1e-6)
    np.testing.assert_allclose([float(r["f_hat"]) for r in rows], 2 * z,
                               rtol=1e-9)


def test_graph_limit_csv(tmp_path):
    out = tmp_path / "lim.csv"
    rc = main(["graph-limit", "--scenario", "bowl", "--grid", "96",
               "--out", str(out)])
    assert rc == 0
    (row,) = _read_csv(out)
    assert row["scenario"] == "bowl"
    assert row["method"] == "graph_limit"
    assert float(row["sigma2_limit"]) == pytest.approx(0.04, rel=1e-3)


def test_sweep_csv_schema(tmp_path):
    out = tmp_path / "sweep.csv"
    rc = main(["sweep", "--scenario", "bowl", "--deltas", "0,1",
               "--horizons", "5,10", "--replicas", "3", "--seed", "2",
               "--out", str(out)])
    assert rc == 0
    rows = _read_csv(out)
    assert list(rows[0]) == ["delta", "t", "kind", "method", "value", "ci",
                             "n_batches", "dt", "seed"]
    assert len(rows) == 4
    assert {r["method"] for r in rows} == {"batch_means"}
    assert {r["kind"] for r in rows} == {"var_of_time_average"}


def test_unknown_preset():
    assert main(["preset", "nothing"]) == 2
