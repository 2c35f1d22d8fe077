import json

import pytest
from click.testing import CliRunner

from bvmatrix.cli import main, resolve_algebra
from bvmatrix.library import bundled_path


@pytest.fixture
def run():
    runner = CliRunner()

    def _run(*args):
        return runner.invoke(main, [str(a) for a in args], catch_exceptions=False)
    return _run


class TestCheck:
    def test_q1_pass(self, run):
        r = run("check", "q1.json")
        assert r.exit_code == 0
        assert "unimodular" in r.stdout and "fail" not in r.stdout

    def test_bundled_file_path(self, run):
        assert run("check", bundled_path("gl2_q1")).exit_code == 0

    def test_t2_fail(self, run, tmp_path):
        out = tmp_path / "t2.json"
        r = run("check", "t2_q1", "--json", out)
        assert r.exit_code == 1
        rep = json.loads(out.read_text())
        assert rep["report"]["unimodular"]["status"] == "fail"
        assert rep["report"]["unimodular"]["witness"] == ["E11"]
        assert (tmp_path / "t2.json.manifest.json").exists()

    def test_malformed(self, run, tmp_path):
        bad = tmp_path / "malformed.json"
        bad.write_text('{"basis_even": ["1"]}')
        assert run("check", bad).exit_code == 2

    def test_missing(self, run):
        assert run("check", "no_such_algebra.json").exit_code == 2


class TestVerify:
    def test_q1_all(self, run, tmp_path):
        out = tmp_path / "v.json"
        r = run("verify", "q1.json", "--N", 2, "--which", "all", "--json", out)
        assert r.exit_code == 0, r.output
        rep = json.loads(out.read_text())
        assert rep["all_pass"]
        assert set(rep["results"]) >= {"master", "delta", "exp", "equivariant", "psi", "psi_equivariant",
                                       "dictionary", "operators"}

    def test_nonassoc_master(self, run, tmp_path):
        out = tmp_path / "v.json"
        r = run("verify", "nonassoc.json", "--N", 1, "--which", "master", "--json", out)
        assert r.exit_code == 1
        assert "witness terms=6" in r.stdout
        assert json.loads(out.read_text())["results"]["master"]["terms"] == 6

    def test_cap(self, run):
        r = run("verify", "q1.json", "--N", 9)
        assert r.exit_code == 2

    def test_size_guard_skips(self, run):
        r = run("verify", "gl2_q1", "--N", 2, "--which", "dictionary", "--which", "operators")
        assert r.exit_code == 0
        assert r.stdout.count("skipped") == 2

    def test_seed_reproducible(self, run, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for p in (a, b):
            assert run("verify", "q1", "--N", 2, "--which", "dictionary", "--seed", 5, "--json", p).exit_code == 0
        assert a.read_bytes() == b.read_bytes()
        manifest = json.loads((tmp_path / "a.json.manifest.json").read_text())
        assert manifest["seed"] == 5 and manifest["command"] == "verify" and manifest["wall_time"] > 0

    def test_json_stdout(self, run):
        r = run("verify", "q1", "--N", 1, "--which", "master", "--json", "-")
        body = r.stdout[r.stdout.index("{"):]
        assert json.loads(body)["all_pass"]


class TestIntegrate:
    def test_normalized(self, run, tmp_path):
        out = tmp_path / "i.json"
        r = run("integrate", "q1.json", "--N", 1, "--y", -5, "--normalized", "--json", out)
        assert r.exit_code == 0
        rep = json.loads(out.read_text())
        assert rep["result"]["value"]["re"] == pytest.approx(0.9937176279711938, rel=1e-8)
        assert rep["result"]["abs_error_estimate"] >= 0
        assert rep["inputs"]["y"] == -5

    def test_raw(self, run, tmp_path):
        out = tmp_path / "i.json"
        assert run("integrate", "q1", "--y", -3, "--raw", "--json", out).exit_code == 0
        assert json.loads(out.read_text())["result"]["value"]["im"] == pytest.approx(0.011784815909444312, rel=1e-8)

    def test_localized_cross_check(self, run, tmp_path):
        out = tmp_path / "i.json"
        r = run("integrate", "q1.json", "--N", 2, "--Y", "-4,-6", "--localized", "--cross-check", "--json", out)
        assert r.exit_code == 0, r.output
        rep = json.loads(out.read_text())
        assert abs(rep["agreement_ratio"]["re"] - 1) < 1e-4 and rep["ok"]
        assert "direct" in rep and rep["result"]["calibration_check"] < 1e-10

    def test_scan_fit(self, run, tmp_path):
        csv_path, out = tmp_path / "s.csv", tmp_path / "s.json"
        r = run("integrate", "q1.json", "--N", 1, "--scan", "-20:-2:10", "--fit-order", 3,
                "--csv", csv_path, "--json", out)
        assert r.exit_code == 0
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "y,value_re,value_im,err" and len(lines) == 11
        fit = json.loads(out.read_text())["fit"]
        assert len(fit["coefficients"]) == 4
        assert fit["coefficients"][1] == pytest.approx(-5 / 48, abs=5e-3)

    def test_bad_angle(self, run):
        assert run("integrate", "q1", "--y", -3, "--angle", 2.0).exit_code == 2

    def test_degenerate(self, run):
        assert run("integrate", "q1", "--y", 0).exit_code == 2

    def test_non_scalar_algebra(self, run):
        assert run("integrate", "gl2_q1", "--y", -3).exit_code == 2

    def test_missing_y(self, run):
        assert run("integrate", "q1").exit_code == 2

    def test_budget_env(self, run, monkeypatch):
        monkeypatch.setenv("BVMATRIX_EVAL_BUDGET", "100")
        assert run("integrate", "q1", "--N", 2, "--Y", "-4,-6", "--raw").exit_code == 1

    def test_seed_reproducible(self, run, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for p in (a, b):
            run("integrate", "q1", "--N", 2, "--Y", "-3,-5", "--seed", 1, "--json", p)
        assert a.read_bytes() == b.read_bytes()


def test_resolve_algebra_unknown():
    with pytest.raises(FileNotFoundError):
        resolve_algebra("definitely_not_here")
