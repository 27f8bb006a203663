import json
import subprocess
import sys

import pytest

from algdyn.cli import main
from algdyn.polyio import dumps
from conftest import CAT, P


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv, "--json")
    return code, json.loads(out)


class TestRing:
    def test_info(self, capsys, tmp_path):
        code, obj = run_json(capsys, "ring", "--poly", "4 - u1 - u1^-1 - u2 - u2^-1", "--out", str(tmp_path))
        assert code == 0
        assert obj["well_balanced"] and not obj["lopsided"]

    def test_divides(self, capsys, tmp_path):
        code, obj = run_json(capsys, "ring", "--poly", CAT, "--op", "divides",
                             "--other", "u^4 - u^3 - u^2", "--out", str(tmp_path))
        assert code == 0 and obj["divides"] is True

    def test_json_file_input(self, capsys, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(dumps(P("3 - u")))
        code, obj = run_json(capsys, "ring", "--poly", str(path), "--out", str(tmp_path))
        assert code == 0 and obj["lopsided"]


class TestInvert:
    def test_artifacts_and_determinism(self, capsys, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        code, obj = run_json(capsys, "invert", "--poly", CAT, "--radius", "12", "--out", str(a))
        assert code == 0 and obj["method"] == "spectral"
        run_json(capsys, "invert", "--poly", CAT, "--radius", "12", "--out", str(b))
        assert (a / "omega.csv").read_text() == (b / "omega.csv").read_text()
        cert = json.loads((a / "omega_certificate.json").read_text())
        assert cert["certificate"]["certified"]

    def test_env_var_output_dir(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("ALGDYN_OUTPUT_DIR", str(tmp_path / "env"))
        code, _ = run_json(capsys, "invert", "--poly", "3 - u", "--radius", "5")
        assert code == 0 and (tmp_path / "env" / "omega.csv").exists()

    def test_refusal_exit_code(self, capsys, tmp_path):
        code, obj = run_json(capsys, "invert", "--poly", "2 - u1 - u2", "--radius", "5", "--out", str(tmp_path))
        assert code == 1 and obj["error"] == "CertificateUnavailable"


class TestOtherCommands:
    def test_zeroset(self, capsys, tmp_path):
        code, obj = run_json(capsys, "zeroset", "--poly", "1 + u1 + u2", "--grid", "64", "--out", str(tmp_path))
        assert code == 0 and obj["classification"] == "FINITE"
        assert (tmp_path / "zeroset.json").exists()

    def test_homoclinic(self, capsys, tmp_path):
        code, obj = run_json(capsys, "homoclinic", "--poly", CAT, "--radius", "20", "--out", str(tmp_path))
        assert code == 0
        assert (tmp_path / "xdelta.csv").exists() and (tmp_path / "decay_profile.csv").exists()

    def test_goe_negative_writes_witness(self, capsys, tmp_path):
        code, obj = run_json(capsys, "goe", "check", "--poly", CAT, "--endo", "u^-2 - u^-1 - 1",
                             "--out", str(tmp_path))
        assert code == 0
        assert obj["surjective"] is False and obj["pre_injective"] is False
        assert (tmp_path / "verdict.json").exists() and (tmp_path / "kernel_witness.csv").exists()

    def test_goe_refusal(self, capsys, tmp_path):
        code, obj = run_json(capsys, "goe", "check", "--poly", "2 - u1 - u2", "--endo", "1 + u1",
                             "--assert-irreducible", "--out", str(tmp_path))
        assert code == 1 and obj["error"] == "CertificateUnavailable"

    def test_fixtures(self, capsys, tmp_path):
        code, obj = run_json(capsys, "fixtures", "--out", str(tmp_path))
        assert code == 0
        assert obj["shift_doubling"]["passed"] and obj["trivial_homoclinic"]["passed"]


class TestUsage:
    def test_parse_error_exit_code(self, capsys, tmp_path):
        code, obj = run_json(capsys, "ring", "--poly", "1 + * u", "--out", str(tmp_path))
        assert code == 1 and obj["error"] == "ParseError"

    def test_usage_error_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["invert"])
        assert exc.value.code == 2

    def test_module_entry_point(self, tmp_path):
        res = subprocess.run([sys.executable, "-m", "algdyn", "--version"], capture_output=True, text=True)
        assert res.returncode == 0 and res.stdout.strip()


def test_selftest(capsys, tmp_path):
    code, obj = run_json(capsys, "selftest", "--out", str(tmp_path))
    assert code == 0


def test_byte_identical_json(tmp_path):
    cmd = [sys.executable, "-m", "algdyn", "goe", "check", "--json", "--poly", CAT,
           "--endo", "u^-2 - u^-1 - 1", "--seed", "3"]
    a = subprocess.run(cmd + ["--out", str(tmp_path / "a")], capture_output=True, text=True)
    b = subprocess.run(cmd + ["--out", str(tmp_path / "b")], capture_output=True, text=True)
    assert a.returncode == 0
    strip = lambda s: s.replace(str(tmp_path / "a"), "X").replace(str(tmp_path / "b"), "X")
    assert strip(a.stdout) == strip(b.stdout)
    va = (tmp_path / "a" / "verdict.json").read_text()
    vb = (tmp_path / "b" / "verdict.json").read_text()
    assert strip(va) == strip(vb)


def test_ledrappier_zeroset_example(capsys, tmp_path):
    code, obj = run_json(capsys, "zeroset", "--poly", "1 + u1 + u2", "--grid", "256", "--out", str(tmp_path))
    assert sorted(tuple(p["center"]) for p in obj["points"]) == [(1 / 3, 2 / 3), (2 / 3, 1 / 3)]


def test_unit_endomorphism_verdict(capsys, tmp_path):
    code, obj = run_json(capsys, "goe", "check", "--poly", CAT, "--endo", "u", "--out", str(tmp_path))
    assert code == 0 and obj["surjective"] and obj["pre_injective"]
