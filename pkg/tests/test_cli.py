"""CLI: config parsing, report determinism, CSV output, and exit codes."""

import csv
import json
import math

import numpy as np
import pytest

from funcjohn.cli import (
    EXIT_CERT_FAIL,
    EXIT_CONFIG_ERROR,
    EXIT_PASS,
    EXIT_PRECONDITION,
    ConfigError,
    function_from_config,
    main,
    position_from_config,
)
from funcjohn.lcfunc import Bump, Gaussian, Height

R2 = 1.0 / math.sqrt(2.0)
BUMP_CONFIG = {"variant": "bump", "dimension": 1,
               "anchors": [[R2], [-R2]]}


def run(tmp_path, *argv):
    return main([*argv])


def test_function_from_config_variants():
    assert function_from_config({"variant": "height", "dimension": 2}) == \
        Height(2)
    assert function_from_config({"variant": "gaussian", "dimension": 1}) == \
        Gaussian(1)
    f = function_from_config(BUMP_CONFIG)
    assert isinstance(f, Bump)
    assert abs(f.sup_norm() - math.e / math.sqrt(2.0)) < 1e-12
    with pytest.raises(ConfigError):
        function_from_config({"variant": "mystery"})
    with pytest.raises(ConfigError):
        function_from_config(["not", "a", "dict"])


def test_position_form_conversion():
    # forward form alpha w(Ax + a) converts to the inverse convention
    fwd = position_from_config({"alpha": 2.0, "A": [[2.0]], "a": [1.0],
                                "form": "forward"})
    inv = position_from_config({"alpha": 2.0, "A": [[0.5]], "a": [-0.5]})
    assert np.allclose(fwd.matrix(), inv.matrix())
    assert np.allclose(fwd.a_vector(), inv.a_vector())
    with pytest.raises(ConfigError):
        position_from_config({"A": [[1.0]], "form": "sideways"})


def test_positioned_function_from_config():
    f = function_from_config({
        "variant": "height", "dimension": 1,
        "position": {"alpha": 2.0, "A": [[3.0]], "a": [0.0]}})
    assert abs(f.evaluate(np.array([0.0])) - 2.0) < 1e-15
    assert abs(f.sup_norm() - 2.0) < 1e-15


def test_gen_decomp_roundtrip(tmp_path):
    out = tmp_path / "g"
    assert main(["gen-decomp", "--d", "2", "--seed", "7",
                 "--out", str(out)]) == EXIT_PASS
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] is True
    assert report["command"] == "gen-decomp"
    dec = json.loads((out / "decomposition.json").read_text())
    assert dec["dimension"] == 2
    assert len(dec["records"]) == 6


def test_verify_decomp_exit_codes(tmp_path):
    good = tmp_path / "good.json"
    main(["gen-decomp", "--d", "1", "--seed", "0", "--out", str(tmp_path)])
    good.write_text((tmp_path / "decomposition.json").read_text())
    assert main(["verify-decomp", "--config", str(good),
                 "--out", str(tmp_path / "v")]) == EXIT_PASS
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "type": "decomposition", "dimension": 1,
        "records": [{"point": [0.5], "weight": 1.0},
                    {"point": [-0.5], "weight": 1.0}]}))
    assert main(["verify-decomp", "--config", str(bad),
                 "--out", str(tmp_path / "vb")]) == EXIT_CERT_FAIL


def test_missing_config_is_config_error():
    assert main(["solve-john"]) == EXIT_CONFIG_ERROR
    assert main(["polar", "--config", "/nonexistent/path.json"]) \
        == EXIT_CONFIG_ERROR


def test_precondition_failure_exit(tmp_path):
    cfg = tmp_path / "f.json"
    cfg.write_text(json.dumps({"f": BUMP_CONFIG}))
    assert main(["fixed-height", "--config", str(cfg), "--xi", "99",
                 "--out", str(tmp_path / "x")]) == EXIT_PRECONDITION


def test_solve_john_certifies_two_point(tmp_path):
    cfg = tmp_path / "f.json"
    cfg.write_text(json.dumps({"f": BUMP_CONFIG, "certify": True,
                               "solver": {"restarts": 1}}))
    out = tmp_path / "s"
    assert main(["solve-john", "--config", str(cfg),
                 "--out", str(out)]) == EXIT_PASS
    report = json.loads((out / "report.json").read_text())
    assert report["solve"]["feasible"] is True
    assert report["certified"] is True
    w = report["solve"]["recovered_weights"]
    assert np.allclose(w, [1.0, 1.0], atol=1e-3)


def test_height_curve_csv_schema(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"f": BUMP_CONFIG,
                               "alphas": [0.5, 1.0],
                               "solver": {"restarts": 1}}))
    out = tmp_path / "hc"
    assert main(["height-curve", "--config", str(cfg),
                 "--out", str(out)]) == EXIT_PASS
    with open(out / "curve.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["alpha", "t", "psi", "phi", "feasible",
                       "max_violation"]
    assert len(rows) == 3
    assert abs(float(rows[2][2]) - 1.0) < 1e-3  # psi(1) = 1


def test_polar_command(tmp_path):
    cfg = tmp_path / "p.json"
    cfg.write_text(json.dumps({"f": {"variant": "gaussian", "dimension": 1},
                               "points": [[0.0], [2.0]]}))
    out = tmp_path / "p"
    assert main(["polar", "--config", str(cfg), "--out", str(out)]) \
        == EXIT_PASS
    report = json.loads((out / "report.json").read_text())
    assert abs(report["values"][0] - 1.0) < 1e-12
    assert abs(report["values"][1] - math.exp(-1.0)) < 1e-12


def test_john_check_and_determinism(tmp_path):
    cfg = tmp_path / "f.json"
    cfg.write_text(json.dumps({"f": BUMP_CONFIG}))
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main(["john-check", "--config", str(cfg), "--seed", "3",
                 "--out", str(a)]) == EXIT_PASS
    assert main(["john-check", "--config", str(cfg), "--seed", "3",
                 "--out", str(b)]) == EXIT_PASS
    ra = json.loads((a / "report.json").read_text())
    rb = json.loads((b / "report.json").read_text())
    assert ra["determinism_hash"] == rb["determinism_hash"]


def test_sandwich_command(tmp_path):
    cfg = tmp_path / "f.json"
    cfg.write_text(json.dumps({"f": BUMP_CONFIG}))
    out = tmp_path / "sw"
    assert main(["sandwich", "--config", str(cfg), "--out", str(out)]) \
        == EXIT_PASS
    report = json.loads((out / "report.json").read_text())
    assert report["record"]["right_envelope"] == "sqrt(2)*exp(-|x|/3+2)"


def test_lowner_check_command(tmp_path):
    cfg = tmp_path / "l.json"
    cfg.write_text(json.dumps({"trials": 10}))
    out = tmp_path / "lc"
    assert main(["lowner-check", "--kind", "expnorm", "--p", "2", "--d", "1",
                 "--config", str(cfg), "--out", str(out)]) == EXIT_PASS
    report = json.loads((out / "report.json").read_text())
    assert report["record"]["probe_values"] == [1.0, 1.0, 1.0, 1.0]
    assert main(["lowner-check", "--kind", "mystery", "--d", "1"]) \
        == EXIT_CONFIG_ERROR


def test_corpus_subset(tmp_path, capsys):
    out = tmp_path / "corp"
    assert main(["corpus", "--criteria", "1,2", "--out", str(out)]) \
        == EXIT_PASS
    lines = capsys.readouterr().out.strip().splitlines()
    verdicts = [ln for ln in lines if ln.startswith("criterion")]
    assert len(verdicts) == 2
    assert all("[PASS]" in ln for ln in verdicts)
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] is True
    assert main(["corpus", "--criteria", "99"]) == EXIT_CONFIG_ERROR


def test_config_roundtrip_stability(tmp_path):
    cfg = {"f": BUMP_CONFIG, "alphas": [0.5, 1.0]}
    text = json.dumps(cfg)
    assert json.loads(json.dumps(json.loads(text))) == cfg
