"""Config validation, experiment drivers, and report serialization."""

import json
import os

import numpy as np
import pytest

from mass_lab.cli import (ExperimentConfig, main, run_experiment,
                          validate_config)

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")


def write_config(tmp_path, payload, name="exp.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_shipped_configs_validate():
    names = sorted(os.listdir(CONFIG_DIR))
    assert names
    for name in names:
        cfg = validate_config(os.path.join(CONFIG_DIR, name))
        assert isinstance(cfg, ExperimentConfig), f"{name}: {cfg}"


def test_unknown_metric_kind_suggests(tmp_path):
    path = write_config(tmp_path, {
        "experiment": "adm",
        "metric": {"kind": "schwarzchild"},
        "radius": 10.0,
    })
    errors = validate_config(path)
    assert isinstance(errors, list)
    assert any("schwarzschild" in e and "did you mean" in e for e in errors)


def test_schema_rejects_unknown_field(tmp_path):
    path = write_config(tmp_path, {
        "experiment": "adm",
        "metric": {"kind": "flat"},
        "radius": 10.0,
        "radiuss": 3.0,
    })
    errors = validate_config(path)
    assert isinstance(errors, list)


def test_negative_tolerance_rejected(tmp_path):
    path = write_config(tmp_path, {
        "experiment": "adm",
        "metric": {"kind": "flat"},
        "radius": 10.0,
        "tolerances": {"adm": -1e-6},
    })
    errors = validate_config(path)
    assert isinstance(errors, list)


def test_main_exit_codes(tmp_path, capsys):
    good = write_config(tmp_path, {
        "experiment": "adm",
        "metric": {"kind": "flat"},
        "radius": 20.0,
        "output": {"json": "adm.json"},
    })
    assert main(["adm", "--config", good, "--out", str(tmp_path)]) == 0
    capsys.readouterr()

    bad = write_config(tmp_path, {
        "experiment": "adm",
        "metric": {"kind": "nonsense"},
        "radius": 20.0,
    }, name="bad.json")
    assert main(["adm", "--config", bad, "--out", str(tmp_path)]) == 1
    assert "config error" in capsys.readouterr().err


def test_wrong_experiment_for_config(tmp_path, capsys):
    path = write_config(tmp_path, {
        "experiment": "adm",
        "metric": {"kind": "flat"},
        "radius": 20.0,
    })
    assert main(["robin", "--config", path, "--out", str(tmp_path)]) == 1
    capsys.readouterr()


def test_precondition_failure_removes_partial_output(tmp_path, capsys):
    path = write_config(tmp_path, {
        "experiment": "mollify",
        "metric": {"kind": "schwarzschild", "mass": 1.0},
        "output": {"csv": "mollify.csv"},
    })
    code = main(["mollify", "--config", path, "--out", str(tmp_path)])
    assert code == 2
    assert not (tmp_path / "mollify.csv").exists()
    assert "precondition" in capsys.readouterr().err


def test_csv_determinism_and_digest(tmp_path, capsys):
    cfg = {
        "experiment": "robin",
        "metric": {"kind": "schwarzschild", "mass": 1.0},
        "radius": 1.0,
        "output": {"csv": "robin.csv"},
    }
    path = write_config(tmp_path, cfg)
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    assert main(["robin", "--config", path, "--out", str(out1)]) == 0
    assert main(["robin", "--config", path, "--out", str(out2)]) == 0
    capsys.readouterr()
    b1 = (out1 / "robin.csv").read_bytes()
    b2 = (out2 / "robin.csv").read_bytes()
    assert b1 == b2
    head = b1.decode().splitlines()[0]
    assert head.startswith("# mass-lab robin digest=")


def test_csv_17_digit_round_trip(tmp_path, capsys):
    cfg = {
        "experiment": "robin",
        "metric": {"kind": "schwarzschild", "mass": 1.0},
        "radius": 1.0,
        "output": {"csv": "robin.csv"},
    }
    path = write_config(tmp_path, cfg)
    assert main(["robin", "--config", path, "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    lines = (tmp_path / "robin.csv").read_text().splitlines()
    data = lines[-1].split(",")
    # column order: r0, d, dG_dmu; values round-trip exactly through repr
    d = float(data[1])
    assert d == 9.0 / 8.0
    dg = float(data[2])
    assert abs(dg - (-8.0 / 27.0)) < 1e-9
    assert float(format(dg, ".17g")) == dg


def test_run_experiment_report_payload(tmp_path):
    path = write_config(tmp_path, {
        "experiment": "fillin",
        "metric": {"kind": "schwarzschild", "mass": 1.0},
        "surface": {"kind": "sphere", "radius": 1.0},
    })
    cfg = validate_config(path)
    report, code = run_experiment(cfg, out_dir=str(tmp_path))
    assert code == 0
    assert abs(report.payload["H_star"] - 8.0 / 9.0) < 1e-9
    assert report.payload["H_star_cross_check"] < 1e-6
