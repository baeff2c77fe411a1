import json

import numpy as np
import pytest

from aqua.cli import main


@pytest.fixture
def sb(tmp_path):
    prefix = str(tmp_path / "sb")
    assert main(["scenario", "spring-balance", "--out", prefix, "--param", "m=4", "--param", "N=6"]) == 0
    return prefix


def test_scenario_files(tmp_path):
    prefix = str(tmp_path / "sch")
    assert main(["scenario", "scheffe", "--out", prefix, "--param", "step=0.25"]) == 0
    info = json.loads(open(prefix + ".info.json").read())
    assert info["schema"] == "aqua/1" and info["name"] == "scheffe"


def test_approx_exact_eval(sb, tmp_path):
    model, cons = sb + ".csv", sb + ".constraints.json"
    ad = str(tmp_path / "ad.json")
    assert main(["approx", "--model", model, "--constraints", cons, "--out", ad]) == 0
    doc = json.load(open(ad))
    assert doc["schema"] == "aqua/1" and doc["report"]["converged"]
    ex = str(tmp_path / "ex.json")
    pts = str(tmp_path / "ex.csv")
    rc = main(["exact", "--model", model, "--constraints", cons, "--out", ex, "--anchor", ad,
               "--points-csv", pts, "--criterion", "A", "--version", "neg"])
    assert rc == 0
    w = np.array(json.load(open(ex))["weights"])
    assert w.sum() == 6 and np.all(w == np.round(w))
    assert open(pts).readline().startswith("index,trials")
    ev = str(tmp_path / "ev.json")
    assert main(["eval", "--model", model, "--constraints", cons, "--design", ad, "--out", ev]) == 0
    out = json.load(open(ev))
    assert out["feasible"] and abs(out["equivalence_gap"]) < 1e-5


def test_round_export(sb, tmp_path):
    d = tmp_path / "w.json"
    d.write_text(json.dumps([0.1] * 10 + [0.0] * 6))
    out = tmp_path / "r.json"
    assert main(["round", "--design", str(d), "--N", "10", "--out", str(out)]) == 0
    assert json.load(open(out))["weights"] == [1.0] * 10 + [0.0] * 6
    exp = tmp_path / "micqp.json"
    assert main(["export", "--model", sb + ".csv", "--constraints", sb + ".constraints.json",
                 "--out", str(exp)]) == 0
    assert json.load(open(exp))["schema"] == "aqua/1"


def test_exit_codes(sb, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"colour": "red"}))
    assert main(["exact", "--config", str(cfg)]) == 1
    assert main(["bogus"]) == 1
    assert main(["exact", "--model", sb + ".csv"]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"rows": [{"coeffs": [1.0] * 16, "sense": "=", "rhs": -3}]}))
    assert main(["exact", "--model", sb + ".csv", "--constraints", str(bad)]) == 2
    rc = main(["exact", "--model", sb + ".csv", "--N", "9", "--node-cap", "1", "--criterion", "A",
               "--out", str(tmp_path / "cap.json")])
    assert rc in (0, 3)
    assert main(["exact", "--model", sb + ".csv", "--N", "3", "--out", str(tmp_path / "small.json")]) in (0, 3)
    assert "warning" in capsys.readouterr().err


def test_config_file(sb, tmp_path):
    cfg = tmp_path / "cfg.json"
    out = tmp_path / "o.json"
    cfg.write_text(json.dumps({"model": sb + ".csv", "N": 8, "criterion": "D", "out": str(out)}))
    assert main(["exact", "--config", str(cfg)]) == 0
    assert sum(json.load(open(out))["weights"]) == 8
