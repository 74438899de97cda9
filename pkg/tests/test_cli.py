import csv
import json
import math
import subprocess
import sys

import pytest

from hardyball.cli import ConfigError, Task, build_config, build_parser, load_config, main


def _run(tmp_path, *args):
    return main(list(args) + ["--out", str(tmp_path)])


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_mass_point_matches_closed_form(tmp_path):
    assert _run(tmp_path, "mass", "--n", "4", "--gamma", "0.75") == 0
    row = _rows(tmp_path / "mass.csv")[0]
    assert float(row["mass"]) == pytest.approx(-1.0, rel=1e-10)
    data = json.loads((tmp_path / "mass.json").read_text())
    assert data["passed"] is True and data["config"]["params"]["n"] == 4


def test_sweep_is_independent_of_worker_count(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["mass", "--gamma", "0.1", "--sweep", "lam:0:8:5"]
    assert main(args + ["--out", str(a), "--workers", "1"]) == 0
    assert main(args + ["--out", str(b), "--workers", "2"]) == 0
    assert (a / "mass.csv").read_bytes() == (b / "mass.csv").read_bytes()
    assert (a / "mass.json").read_bytes() == (b / "mass.json").read_bytes()
    assert (a / "mass.png").exists()
    rows = _rows(a / "mass.csv")
    assert [float(r["lam"]) for r in rows] == [0.0, 2.0, 4.0, 6.0, 8.0]


def test_threshold_row(tmp_path):
    assert _run(tmp_path, "threshold", "--gamma", "0.0") == 0
    row = _rows(tmp_path / "threshold.csv")[0]
    assert float(row["lambda_star"]) == pytest.approx(math.pi**2 / 4, rel=1e-7)


def test_config_file_and_flag_precedence(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[task]\nname = eigen\n[params]\nn = 5\ngamma = 1.0\n[numerics]\ngrid_size = 500\n")
    assert load_config(ini)["params.n"] == "5"
    args = build_parser().parse_args(["eigen", "--config", str(ini), "--gamma", "2.0"])
    cfg = build_config(Task.LAMBDA1, args)
    assert (cfg.params.n, cfg.params.gamma, cfg.numerics.grid_size) == (5, 2.0, 500)


def test_config_for_another_task_is_rejected(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[task]\nname = mass\n")
    args = build_parser().parse_args(["eigen", "--config", str(ini)])
    with pytest.raises(ConfigError):
        build_config(Task.LAMBDA1, args)


@pytest.mark.parametrize("argv,field", [
    (["mass", "--gamma", "0.3"], "params"),
    (["mass", "--sweep", "lam:0:1"], "sweep"),
    (["mass", "--sweep", "alpha:0:1:3"], "sweep"),
    (["robin", "--pole", "1.5"], "pole"),
])
def test_bad_input_names_the_field(tmp_path, capsys, argv, field):
    assert _run(tmp_path, *argv) == 2
    assert field in capsys.readouterr().err


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("HARDYBALL_OUT", str(tmp_path / "env"))
    assert main(["exponents", "--gamma", "0.2"]) == 0
    assert (tmp_path / "env" / "exponents.csv").exists()


def test_report_subset(tmp_path):
    assert _run(tmp_path, "report", "--only", "exponents", "lambda1") == 0
    data = json.loads((tmp_path / "report.json").read_text())
    assert set(data["checks"]) == {"exponents", "lambda1"}
    assert data["passed"] is True
    assert (tmp_path / "report.png").exists()


def test_error_rows_do_not_crash(tmp_path):
    # gap >= 2 has no interior mass: the row records the error and fails
    assert _run(tmp_path, "mass", "--n", "5", "--gamma", "0.0") == 1
    row = _rows(tmp_path / "mass.csv")[0]
    assert "RegimeError" in row["error"]


def test_console_script_help():
    out = subprocess.run([sys.executable, "-m", "hardyball.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "report" in out.stdout
