import csv
import io
import json
import math
import subprocess
import sys

import pytest
from jsonschema import Draft202012Validator

from juliathermo.cli import SCHEMA_PATH, main, parse_complex, parse_ints, render_command

SCHEMA = Draft202012Validator(json.loads(SCHEMA_PATH.read_text()))


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def doc_of(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 0, err
    doc = json.loads(out)
    SCHEMA.validate(doc)
    return doc


def test_parsers():
    assert parse_complex("0.1,-0.2") == complex(0.1, -0.2)
    assert parse_complex("0.3") == 0.3
    assert parse_ints("3,5-7") == [3, 5, 6, 7]


def test_lyap_examples(capsys):
    doc = doc_of(["lyap", "--family", "quad", "--c", "0", "--weights", "0.5,0.5", "--method", "conjugacy"], capsys)
    assert doc["result"]["value"] == pytest.approx(-0.6931471806, abs=1e-10)
    doc = doc_of(["lyap", "--family", "cubic", "--a1", "0", "--a0", "0",
                  "--weights", "0.3333333,0.3333333,0.3333334"], capsys)
    assert abs(doc["result"]["value"] + math.log(3)) < 1e-6
    doc = doc_of(["lyap", "--family", "quad", "--c", "0.1", "--weights", "0.9999,0.0001", "--method", "dirac"], capsys)
    assert doc["result"]["value"] == pytest.approx(-math.log(2 * 0.8872983346), abs=1e-10)
    assert doc["result"]["positive_exponent"] == -doc["result"]["value"]


def test_lyap_mc_needs_seed(capsys):
    code, _, err = run(["lyap", "--c", "0.05", "--method", "mc"], capsys)
    assert code == 1 and "seed" in err
    doc = doc_of(["lyap", "--c", "0.05", "--method", "mc", "--n", "8", "--seed", "3"], capsys)
    assert doc["result"]["method"] == "BirkhoffMC" and doc["config"]["seed"] == 3


def test_expand_quadratic(capsys):
    doc = doc_of(["expand", "--family", "quad"], capsys)
    terms = {t["monomial"]: t["pointwise"] for t in doc["result"]["terms"]}
    assert terms["c_R"] == pytest.approx(1, abs=1e-3)
    assert terms["c_R^2"] == pytest.approx(1.5, abs=1e-3) and terms["c_I^2"] == pytest.approx(-1.5, abs=1e-3)
    doc = doc_of(["expand", "--family", "quad", "--weights", "0.5,0.5"], capsys)
    assert all(abs(t["pointwise"]) < 1e-6 for t in doc["result"]["terms"])


def test_pressure_and_dimension(capsys):
    doc = doc_of(["pressure", "--c", "0", "--s", "1", "--n", "3"], capsys)
    assert doc["result"]["samples"][0]["value"] == pytest.approx(math.log(7 / 8) / 3, abs=1e-12)
    doc = doc_of(["pressure", "--c", "0", "--s", "0.5"], capsys)
    assert doc["result"]["limits"][0]["value"] == pytest.approx(math.log(2) / 2, abs=1e-4)
    doc = doc_of(["pressure", "--c", "0", "--potential", "g", "--weights", "0.5,0.5", "--n", "4"], capsys)
    assert doc["result"]["samples"][0]["value"] == pytest.approx(math.log(15 / 16) / 4, abs=1e-12)
    doc = doc_of(["dimension", "--c", "0"], capsys)
    assert abs(doc["result"]["dimension"] - 1) < 1e-6


def test_orbits_and_julia(capsys):
    doc = doc_of(["orbits", "--c", "0", "--n", "3"], capsys)
    assert doc["result"]["count"] == 7
    assert all(p["multiplier_abs"] == pytest.approx(8) for p in doc["result"]["points"])
    roots = doc_of(["orbits", "--c", "0", "--n", "3", "--method", "roots"], capsys)
    assert roots["result"]["count"] == 7
    doc = doc_of(["julia", "--c", "0", "--n", "50", "--seed", "1"], capsys)
    assert len(doc["result"]["points"]) == 50


@pytest.mark.parametrize("argv", [
    ["lyap", "--c", "0.9,0.9"],
    ["lyap", "--c", "abc"],
    ["lyap", "--bogus"],
    ["lyap", "--family", "quad", "--weights", "0.2,0.3,0.5"],
    ["lyap", "--weights", "1,0"],
    ["orbits", "--method", "magic"],
    ["verify", "--suite", "12", "--seed", "1"],
    ["julia", "--n", "10"],
])
def test_invalid_input_exits_1(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 1 and out == "" and err.startswith("error:")


def test_convergence_failure_exits_2(capsys):
    code, out, err = run(["lyap", "--c", "0.2", "--weights", "0.9,0.1", "--level", "8"], capsys)
    assert code == 2 and out == ""
    assert "best value" in err


def test_strict_exit_3_on_missed_target(monkeypatch, capsys):
    import juliathermo.cli as cli

    real = cli.extract_coefficients

    def degraded(*args, **kwargs):
        report = real(*args, **kwargs)
        report.terms[0].target_status = "flagged"
        return report

    code, _, _ = run(["expand", "--family", "quad", "--strict"], capsys)
    assert code == 0
    monkeypatch.setattr(cli, "extract_coefficients", degraded)
    argv = ["expand", "--family", "quad"]
    code, out, _ = run(argv, capsys)
    assert code == 0 and json.loads(out)["result"]["target_ok"] is False
    code, out, err = run(argv + ["--strict"], capsys)
    assert code == 3 and "verification failed" in err and out


def test_no_target_is_not_a_failure(capsys):
    code, out, _ = run(["expand", "--family", "quad", "--weights", "0.7,0.3", "--tol", "1e-5", "--strict"], capsys)
    assert code == 0 and json.loads(out)["result"]["target_ok"] is True


def test_strict_exit_3_on_failed_criterion(monkeypatch, capsys):
    import juliathermo.verification as verification

    def failing(suite, seed):
        crit = {"criterion": 5, "title": "stub", "status": "fail", "flagged": 0,
                "checks": [{"id": "x", "description": "stub", "target": 1.0, "computed": 2.0,
                            "tolerance": 0.1, "status": "fail", "basis": "derived"}]}
        return {"suite": suite, "passed": False, "criteria": [crit],
                "environment": {"version": "0", "seed": seed, "backend": "python"}}, {"5": 0.0}

    monkeypatch.setattr(verification, "run_suite", failing)
    assert run(["verify", "--suite", "5", "--seed", "1"], capsys)[0] == 0
    assert run(["verify", "--suite", "5", "--seed", "1", "--strict"], capsys)[0] == 3


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# reproduction settings\nfamily = quad\nc = 0.1\nweights = 0.9999,0.0001\nmethod = dirac\n")
    doc = doc_of(["lyap", "--config", str(cfg)], capsys)
    assert doc["result"]["value"] == pytest.approx(-math.log(2 * 0.8872983346), abs=1e-10)
    doc = doc_of(["lyap", "--config", str(cfg), "--c", "0"], capsys)
    assert doc["result"]["value"] == pytest.approx(-math.log(2), abs=1e-15)
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    code, _, _ = run(["lyap", "--config", str(bad)], capsys)
    assert code == 1


def test_csv_output(capsys):
    code, out, _ = run(["pressure", "--c", "0", "--s", "0,1", "--n", "2-4", "--format", "csv"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 6 and set(rows[0]) == {"s", "n", "value"}
    assert float(rows[0]["value"]) == pytest.approx(math.log(3) / 2, abs=1e-12)


def test_out_writes_sidecar(tmp_path, capsys):
    out = tmp_path / "dim.json"
    code, stdout, _ = run(["dimension", "--c", "0", "--out", str(out)], capsys)
    assert code == 0 and stdout == ""
    SCHEMA.validate(json.loads(out.read_text()))
    meta = json.loads((tmp_path / "dim.json.meta.json").read_text())
    assert {"started_utc", "wall_seconds", "backend"} <= set(meta)
    assert "started_utc" not in out.read_text()


def test_svg_output(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    for path in (a, b):
        code, _, _ = run(["julia", "--c", "0.1", "--n", "200", "--seed", "2", "--svg", str(path)], capsys)
        assert code == 0
    assert a.read_text().startswith("<?xml") and a.read_bytes() == b.read_bytes()


def test_render_is_deterministic():
    argv = ["lyap", "--c", "0.03,0.04", "--weights", "0.7,0.3"]
    assert render_command(argv) == render_command(argv)


def test_verify_twice_is_byte_identical(tmp_path):
    outs = [tmp_path / "v1.json", tmp_path / "v2.json"]
    procs = [subprocess.Popen([sys.executable, "-m", "juliathermo.cli", "verify", "--suite", "all", "--seed", "42",
                               "--out", str(p)], stderr=subprocess.PIPE) for p in outs]
    codes = [p.wait(timeout=900) for p in procs]
    assert codes == [0, 0]
    assert outs[0].read_bytes() == outs[1].read_bytes()
    doc = json.loads(outs[0].read_text())
    SCHEMA.validate(doc)
    assert doc["result"]["passed"] and len(doc["result"]["criteria"]) == 9
    meta = json.loads((tmp_path / "v1.json.meta.json").read_text())
    assert set(meta["criterion_seconds"]) == {str(k) for k in range(1, 10)}
