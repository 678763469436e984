import csv
import json

import pytest

from cxpinn.cli import EXIT_CONFIG, EXIT_OK, main
from cxpinn.metrics import load_report


def _toml(tmp_path, body):
    f = tmp_path / "cfg.toml"
    f.write_text(body)
    return str(f)


SMALL = """
name = "small"
width = 8
metric_every = 5
[problem]
name = "helmholtz2d"
[points]
n_interior = 100
test_grid = 15
[[phases]]
optimizer = "adam"
iterations = 10
lr = 5e-3
"""


def test_run_writes_report(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", _toml(tmp_path, SMALL), "--out", str(out), "--seed", "3", "--threads", "1"]) == EXIT_OK
    rep = load_report(out)
    assert rep.seed == 3 and rep.config["threads"] == 1 and rep.config["seed"] == 3
    assert (out / "history.csv").exists() and (out / "checkpoint.bin").exists()
    assert "rel_l2=" in capsys.readouterr().out
    assert main(["report", str(out)]) == EXIT_OK
    assert "parameters: 57" in capsys.readouterr().out


def test_run_trials(tmp_path):
    out = tmp_path / "t"
    assert main(["run", _toml(tmp_path, SMALL), "--out", str(out), "--trials", "2"]) == EXIT_OK
    summary = json.loads((out / "trials.json").read_text())
    assert [t["seed"] for t in summary["trials"]] == [0, 1]
    assert (out / "seed1" / "report.json").exists()


def test_config_errors_exit_1(tmp_path, capsys):
    assert main(["run", "no_such_preset"]) == EXIT_CONFIG
    bad = SMALL.replace("iterations = 10", "iterations = 0")
    assert main(["run", _toml(tmp_path, bad)]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_numerical_failure_exit_2(tmp_path):
    body = SMALL.replace("lr = 5e-3", "lr = 1e200")
    assert main(["run", _toml(tmp_path, body), "--out", str(tmp_path / "o")]) == 2
    assert load_report(tmp_path / "o").status == "nonfinite"


def test_sweep_init(tmp_path):
    out = tmp_path / "s"
    assert main(["sweep-init", _toml(tmp_path, SMALL), "--param", "mu1", "--values", "0.01", "0.5",
                 "--trials", "1", "--out", str(out)]) == EXIT_OK
    rows = list(csv.DictReader((out / "sweep.csv").open()))
    assert [r["value"] for r in rows] == ["0.01", "0.5"]


def test_check_grad(capsys):
    assert main(["check-grad", "--quick", "--problem", "poisson5d"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out and "all checks passed" in out


def test_cauchy_demo_csv(tmp_path):
    out = tmp_path / "demo.csv"
    assert main(["cauchy-demo", "--m", "8", "64", "--rule", "trapezoid", "--out", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert [int(r["m"]) for r in rows] == [8, 64] and float(rows[1]["error"]) < 1e-6


def test_parser_requires_command():
    with pytest.raises(SystemExit):
        main([])
