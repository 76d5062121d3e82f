import csv
import io
import json
import subprocess
import sys
import time

import pytest

from holonomy_instantons import __version__
from holonomy_instantons.cli import CSV_HEADER, config_from_args, dumps_json, emit_report, main, read_config_file
from holonomy_instantons.suites import CaseRecord, ConfigError, SuiteConfig, SuiteReport, case_rng, run_suite

FAST = ["--suite", "ode", "--samples", "2"]


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr()


def test_empty_report_json_shape():
    text = emit_report(SuiteReport(__version__, 7), "json").decode()
    assert json.loads(text) == {"cases": [], "seed": 7, "version": __version__, "wall_time": 0.0}


def test_json_floats_and_special_values():
    assert dumps_json({"b": 0.1, "a": [1, float("inf"), float("nan")]}) == '{"a":[1,"inf","nan"],"b":0.10000000000000001}'
    with pytest.raises(TypeError):
        dumps_json(object())


def test_csv_header_and_rows():
    rep = SuiteReport("x", 1, [CaseRecord("s", "c", {"k": 1}, 3, 0.5, 1.0, "note")])
    rows = list(csv.reader(io.StringIO(emit_report(rep, "csv").decode())))
    assert tuple(rows[0]) == CSV_HEADER
    assert rows[1] == ["s", "c", '{"k":1}', "3", "0.5", "1", "true", "note"]


def test_text_report_has_no_color_off_tty():
    rep = SuiteReport("x", 1, [CaseRecord("s", "c", {}, 1, 2.0, 1.0)])
    text = emit_report(rep, "text").decode()
    assert "FAIL" in text and "\033[" not in text


def test_case_record_pass_rule():
    assert CaseRecord("s", "c", {}, 1, 1.0, 1.0).passed
    assert not CaseRecord("s", "c", {}, 1, float("nan"), 1.0).passed
    assert not CaseRecord("s", "c", {}, 1, float("inf"), float("inf")).passed


def test_case_streams_are_independent_and_reproducible():
    a = case_rng(42, "g2/x", 0).standard_normal(3)
    assert (a == case_rng(42, "g2/x", 0).standard_normal(3)).all()
    assert not (a == case_rng(42, "g2/x", 1).standard_normal(3)).all()
    assert not (a == case_rng(42, "g2/y", 0).standard_normal(3)).all()
    assert not (a == case_rng(43, "g2/x", 0).standard_normal(3)).all()


def test_exit_zero_on_pass(capsys):
    code, out = run(FAST + ["--d", "1,10"], capsys)
    assert code == 0
    data = json.loads(out.out)
    assert data["seed"] == 42 and all(c["pass"] for c in data["cases"])


def test_exit_one_on_failure(capsys):
    code, out = run(["--suite", "spin7", "--samples", "1", "--d", "0"], capsys)
    assert code == 1
    failed = [c["case_id"] for c in json.loads(out.out)["cases"] if not c["pass"]]
    assert failed == ["nontrivial.D=0"]


def test_singular_parameter_fails(capsys):
    code, out = run(["--suite", "g2", "--samples", "1", "--c", "-4"], capsys)
    assert code == 1
    case = next(c for c in json.loads(out.out)["cases"] if c["case_id"] == "instanton.C=-4")
    assert case["max_residual"] == "inf" and "singular" in case["notes"]


@pytest.mark.parametrize("argv", [
    ["--suite", "nope"],
    ["--tol", "-1"],
    ["--samples", "0"],
    ["--r-min", "5", "--r-max", "1"],
    ["--rho-max", "50"],
    ["--kappa", "0"],
    ["--c", "1,x"],
    ["--format", "xml"],
])
def test_usage_errors_exit_two(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == 2


def test_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nsuite = ode\nsamples=3  # trailing\nc = 1, 2\nr_max = 50\n")
    cfg = config_from_args(["--config", str(path), "--samples", "5"])
    assert cfg.suite == "ode" and cfg.samples == 5 and cfg.c_list == (1.0, 2.0) and cfg.r_max == 50.0


@pytest.mark.parametrize("text", ["bogus = 1\n", "samples\n", "samples = many\n"])
def test_bad_config_file(tmp_path, text):
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    with pytest.raises(ConfigError):
        read_config_file(str(path))
    assert main(["--config", str(path)]) == 2


def test_missing_config_file(tmp_path):
    assert main(["--config", str(tmp_path / "none.cfg")]) == 2


def test_unwritable_output(tmp_path):
    assert main(FAST + ["--d", "1", "--out", str(tmp_path / "missing" / "r.json")]) == 2


def test_output_file_and_formats(tmp_path):
    out = tmp_path / "r.csv"
    assert main(FAST + ["--d", "1", "--format", "csv", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == ",".join(CSV_HEADER)


def test_tol_override_applies_to_residual_cases():
    rep = run_suite(SuiteConfig(suite="ode", samples=1, d_list=(1.0,), tol=1e-30).validate())
    assert any(c.tol == 1e-30 for c in rep.cases)
    assert not rep.passed


def test_reports_are_deterministic():
    cfg = SuiteConfig(suite="algebra", samples=5).validate()
    a = emit_report(run_suite(cfg), "json", include_wall_time=False)
    b = emit_report(run_suite(cfg), "json", include_wall_time=False)
    assert a == b


def test_algebra_suite_is_fast():
    start = time.perf_counter()
    rep = run_suite(SuiteConfig(suite="algebra", samples=1000).validate())
    assert time.perf_counter() - start < 10.0
    assert rep.passed and all(c.samples == 1000 for c in rep.cases)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "holonomy_instantons", "--suite", "nope"],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "invalid choice" in proc.stderr
