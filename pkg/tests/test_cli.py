import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from bsdverify.cli import (
    CheckRun,
    ConfigError,
    emit_report,
    exit_code,
    main,
    parse_report,
    replay_worst_point,
    run_check,
)

SCHEMA = json.loads(resources.files("bsdverify").joinpath("schema/report-v1.json").read_text())


def strip_time(data: bytes) -> dict:
    d = json.loads(data)
    d.pop("wall_time")
    return d


@pytest.fixture(scope="module")
def fail_report():
    return run_check(CheckRun("psh", "I:1,1", seed=0, samples=60, extra={"r": 1}))


class TestCheckRun:
    def test_defaults(self):
        run = CheckRun("strict", "IV:4").validate()
        assert run.extra["r"] == 4.0 and run.tol == 1e-6
        assert CheckRun("invariance", "I:2,2").validate().tol == 1e-10
        s = CheckRun("section", "I:2,2").validate()
        assert s.extra == {"base_dim": 2, "section": "holo", "sections": 10}
        assert CheckRun("df_scan", "I:1,1").validate().extra["mu_grid"] == "0.05:1:0.05"

    @pytest.mark.parametrize("run", [
        CheckRun("nope", "I:2,2"),
        CheckRun("psh", "VII"),
        CheckRun("psh", "I:0,2"),
        CheckRun("psh", "I:2,2", samples=0),
        CheckRun("psh", "I:2,2", seed=-1),
        CheckRun("psh", "I:2,2", step=0.0),
        CheckRun("psh", "I:2,2", tol=-1.0),
        CheckRun("psh", "I:2,2", extra={"r": 0.5}),
        CheckRun("exponent_scan", "I:2,2", extra={"mu_grid": "0.1:0.05:0.01"}),
        CheckRun("exponent_scan", "I:2,2", extra={"mu_grid": "0.5:1.5:0.5"}),
        CheckRun("df_scan", "I:2,2"),
        CheckRun("identity", "II:4"),
        CheckRun("section", "I:2,2", extra={"section": "mixed"}),
    ])
    def test_config_errors(self, run):
        with pytest.raises(ConfigError):
            run.validate()

    def test_json_round_trip(self):
        run = CheckRun("section", "I:2,2", 3, 5, None, None, {"section": "antiholo"}).validate()
        assert CheckRun.from_json(json.loads(json.dumps(run.to_json()))) == run


class TestReports:
    def test_pass_report(self):
        rep = run_check(CheckRun("psh", "I:2,2", seed=1, samples=20))
        assert rep.verdict == "pass" and exit_code(rep) == 0
        jsonschema.validate(json.loads(emit_report(rep)), SCHEMA)

    def test_fail_report(self, fail_report):
        assert fail_report.verdict == "fail" and exit_code(fail_report) == 1
        assert fail_report.worst_min_eig < 0
        doc = json.loads(emit_report(fail_report))
        jsonschema.validate(doc, SCHEMA)
        assert doc["worst_point"]["coords"]

    def test_round_trip(self, fail_report):
        data = emit_report(fail_report)
        back = parse_report(data)
        assert emit_report(back) == data

    def test_replay_is_exact(self, fail_report):
        assert replay_worst_point(fail_report) == fail_report.worst_min_eig
        doc = json.loads(emit_report(fail_report))
        assert replay_worst_point(doc) == fail_report.worst_min_eig

    @pytest.mark.parametrize("run", [
        CheckRun("strict", "I:2,2", seed=2, samples=10),
        CheckRun("exponent_scan", "I:1,2", seed=0, samples=10, extra={"mu_grid": "0.25:0.75:0.25"}),
        CheckRun("section", "I:1,1", seed=0, samples=10, extra={"section": "antiholo", "sections": 2}),
    ])
    def test_replay_other_checks(self, run):
        rep = run_check(run)
        jsonschema.validate(json.loads(emit_report(rep)), SCHEMA)
        assert replay_worst_point(parse_report(emit_report(rep))) == rep.worst_min_eig

    def test_replay_unsupported(self):
        rep = run_check(CheckRun("invariance", "IV:3", samples=4))
        with pytest.raises(ValueError):
            replay_worst_point(rep)

    def test_determinism(self):
        run = CheckRun("invariance", "I:2,2", seed=9, samples=20)
        a, b = run_check(run), run_check(run)
        assert a.passed
        assert strip_time(emit_report(a)) == strip_time(emit_report(b))

    def test_identity_report(self):
        rep = run_check(CheckRun("identity", "IV:3", samples=5))
        assert rep.passed
        names = [r["name"] for r in rep.details["identities"]]
        assert "comparison_det_positive_sign" in names
        jsonschema.validate(json.loads(emit_report(rep)), SCHEMA)

    def test_scan_report_fields(self):
        rep = run_check(CheckRun("df_scan", "I:1,1", samples=20, extra={"mu_grid": "0.25:0.9:0.65"}))
        d = rep.details
        assert rep.passed and d["proven_bound"] == 0.5
        assert [r["mu"] for r in d["rows"]] == [0.25, 0.9]
        assert d["rows"][1]["verdict"] == "fail"

    def test_numerical_error_becomes_fail(self, monkeypatch):
        import numpy as np

        from bsdverify import cli
        from bsdverify.calculus import StencilOutOfDomain

        def boom(run, spec):
            raise StencilOutOfDomain("undefined", point=np.array([0.5 + 0.1j, 0.2]))

        monkeypatch.setitem(cli._RUNNERS, "psh", boom)
        rep = run_check(CheckRun("psh", "I:1,1", samples=5))
        assert rep.verdict == "fail" and exit_code(rep) == 1
        assert rep.error.startswith("StencilOutOfDomain")
        assert rep.worst_point == {"coords": [[0.5, 0.1], [0.2, 0.0]]}
        jsonschema.validate(json.loads(emit_report(rep)), SCHEMA)

    def test_text_format(self, fail_report):
        text = emit_report(fail_report, "text").decode()
        assert "verdict  FAIL" in text and "min_eig" in text
        with pytest.raises(ValueError):
            emit_report(fail_report, "xml")


class TestMain:
    def test_exit_codes(self, capsys):
        assert main(["--check", "psh", "--domain", "I:1,2", "--samples", "5"]) == 0
        doc = json.loads(capsys.readouterr().out)
        jsonschema.validate(doc, SCHEMA)
        assert main(["--check", "psh", "--domain", "I:1,1", "--samples", "60", "--r", "1"]) == 1
        capsys.readouterr()
        assert main(["--check", "identity", "--domain", "II:4"]) == 2
        assert "configuration error" in capsys.readouterr().err

    @pytest.mark.parametrize("args", [
        ["--domain", "XI"], ["--mu-grid", "1:0:1", "--check", "exponent_scan"], ["--samples", "0"],
    ])
    def test_bad_arguments(self, args, capsys):
        base = {"--check": "psh", "--domain": "I:2,2"}
        argv = []
        for k, v in base.items():
            if k not in args:
                argv += [k, v]
        assert main(argv + args) == 2

    def test_argparse_rejects_non_integer_seed(self):
        with pytest.raises(SystemExit) as exc:
            main(["--check", "psh", "--domain", "I:2,2", "--seed", "abc"])
        assert exc.value.code == 2

    def test_out_file_and_text(self, tmp_path, capsys):
        out = tmp_path / "r.json"
        argv = ["--check", "invariance", "--domain", "IV:4", "--samples", "10", "--out", str(out)]
        assert main(argv) == 0
        assert capsys.readouterr().out == ""
        jsonschema.validate(json.loads(out.read_bytes()), SCHEMA)
        assert main(argv[:-2] + ["--format", "text"]) == 0
        assert "verdict  PASS" in capsys.readouterr().out

    def test_console_module(self):
        proc = subprocess.run([sys.executable, "-m", "bsdverify.cli", "--check", "psh", "--domain", "I:1,1",
                               "--samples", "3"], capture_output=True)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["verdict"] == "pass"
