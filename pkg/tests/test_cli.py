import csv
import json
import subprocess
import sys

import pytest

from hexscat.cli import build_parser, run


def out_json(capsys):
    return json.loads(capsys.readouterr().out)


def test_verify_lattice(capsys):
    assert run(["verify-lattice", "--radius", "3"]) == 0
    text = capsys.readouterr().out
    assert "PASS" in text and "FAIL" not in text


def test_verify_support(capsys):
    assert run(["verify-support", "--max-s", "3"]) == 0
    doc = out_json(capsys)
    assert doc["ok"] and doc["violations"] == []


@pytest.mark.parametrize("method", ["series", "quad"])
def test_r0(capsys, method):
    assert run(["r0", "--z-re", "0", "--z-im", "10", "--n1", "0", "--n2", "0", "--method", method]) == 0
    blk = out_json(capsys)["block"]
    assert blk[0][0][1] == pytest.approx(0.0971, abs=5e-5)


def test_r0_rejects_spectrum(capsys):
    assert run(["r0", "--z-re", "1", "--z-im", "0", "--n1", "0", "--n2", "0"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "usage"


def test_zeta(capsys):
    assert run(["zeta", "--N", "400", "--theta", "0.2", "--branch", "neg"]) == 0
    doc = out_json(capsys)
    assert doc["branch"] == "neg"
    assert doc["prediction"]["im1"] < 0 < doc["prediction"]["im2"]
    assert doc["deviation"]["im2"] < 1e-3


def test_zeta_theta_out_of_range(capsys):
    assert run(["zeta", "--N", "100", "--theta", "0.4"]) == 2


def test_gen_potential_and_forward(tmp_path, capsys):
    path = tmp_path / "q.json"
    assert run(["gen-potential", "--M", "2", "--seed", "7", "--out", str(path)]) == 0
    first = path.read_text()
    assert run(["gen-potential", "--M", "2", "--seed", "7", "--out", str(path)]) == 0
    assert path.read_text() == first
    argv = ["forward", "--potential", str(path), "--z-re", "1", "--z-im", "50", "--theta", "0.2",
            "--theta-prime", "0.25", "--block", "11"]
    assert run(argv) == 0
    a = capsys.readouterr().out
    assert run(argv) == 0
    assert capsys.readouterr().out == a
    doc = json.loads(a)
    assert set(doc) >= {"B0", "B1", "B"}


def test_forward_errors(tmp_path, capsys):
    assert run(["forward", "--potential", str(tmp_path / "missing.json"), "--z-re", "1", "--z-im", "5",
                "--theta", "0.2", "--theta-prime", "0.2"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"M": 0, "sites": [{"n1": 1, "n2": 0, "q1": 1}]}')
    assert run(["forward", "--potential", str(bad), "--z-re", "1", "--z-im", "5",
                "--theta", "0.2", "--theta-prime", "0.2"]) == 2
    assert "outside" in json.loads(capsys.readouterr().err.splitlines()[-1])["message"]


def test_spectrum_csv(tmp_path):
    path = tmp_path / "p.csv"
    assert run(["spectrum", "--grid", "64", "--out", str(path)]) == 0
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 64 * 64
    origin = [r for r in rows if float(r["xi1"]) == 0 and float(r["xi2"]) == 0]
    assert float(origin[0]["p"]) == pytest.approx(3)
    assert sum(r["grad_norm"] == "nan" for r in rows) == 2


def test_reconstruct_stable_configuration(tmp_path, capsys):
    truth = tmp_path / "q.json"
    run(["gen-potential", "--M", "1", "--seed", "3", "--out", str(truth)])
    rec, rep = tmp_path / "rec.json", tmp_path / "rep.json"
    code = run(["reconstruct", "--potential", str(truth), "--levels", "20", "--ratio", "1.1",
                "--out", str(rec), "--report", str(rep)])
    assert code == 0
    doc = json.loads(rep.read_text())
    assert doc["ok"] and doc["max_abs_error"] <= 1e-2
    assert len(doc["stages"]) == 6 and {"condition", "imag_residual", "richardson_error"} <= set(doc["stages"][0])
    assert json.loads(rec.read_text())["M"] == 1


def test_reconstruct_radius_check(tmp_path):
    truth = tmp_path / "q.json"
    run(["gen-potential", "--M", "2", "--seed", "1", "--out", str(truth)])
    assert run(["reconstruct", "--potential", str(truth), "--M", "1"]) == 2


def test_help_lists_defaults(capsys):
    parser = build_parser()
    sub = parser._subparsers._group_actions[0].choices
    assert set(sub) == {"verify-lattice", "verify-support", "r0", "zeta", "forward", "reconstruct", "spectrum",
                        "gen-potential"}
    text = sub["reconstruct"].format_help()
    for default in ("1000", "levels", "(default: 3)", "(default: 2.0)", "(default: 9)", "(default: 0.01)"):
        assert default in text
    assert "(default: 12)" in sub["verify-lattice"].format_help()
    assert "(default: 8)" in sub["verify-support"].format_help()
    assert "(default: 64)" in sub["spectrum"].format_help()


def test_usage_errors():
    assert run([]) == 2
    assert run(["no-such-command"]) == 2
    assert run(["--help"]) == 0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "hexscat", "verify-lattice", "--radius", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "all checks pass" in res.stdout
