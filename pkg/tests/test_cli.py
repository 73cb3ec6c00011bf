"""Command-line interface: output contracts, exit codes, config precedence."""

import json
import subprocess
import sys
from pathlib import Path
from types import SimpleNamespace

import jsonschema
import pytest

from lojexp.cli import main, resolve_opt_config
from lojexp.errors import InputError
from lojexp.polyring import family, parse_poly

SCHEMA = json.loads(
    (Path(__file__).resolve().parent.parent / "docs" / "result_schema.json").read_text()
)

F11_TEXT = "x - 3*x^3*y^2 + 2*x^4*y^3 + y*z"

CHEAP = ["--starts", "2", "--max-iters", "2"]


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run_cli(capsys, *argv, "--format", "json")
    assert code == 0, err
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    return doc


# -- family ---------------------------------------------------------------------


def test_family_prints_the_polynomial(capsys):
    code, out, err = run_cli(capsys, "family", "-n", "1", "-q", "1")
    assert code == 0
    assert out == F11_TEXT + "\n"
    assert err == ""


def test_family_other_parameters(capsys):
    code, out, _ = run_cli(capsys, "family", "-n", "2", "-q", "3")
    assert code == 0
    assert out == "x - 3*x^5*y^6 + 2*x^7*y^9 + y*z\n"


def test_family_rejects_bad_parameters(capsys):
    code, out, err = run_cli(capsys, "family", "-n", "0", "-q", "1")
    assert code == 2
    assert out == ""
    assert "n must be >= 1" in err


def test_family_verify_text_report(capsys):
    code, out, _ = run_cli(capsys, "family", "-n", "1", "-q", "1", "--verify")
    assert code == 0
    assert f"f = {F11_TEXT}" in out
    assert "straightened = x + y*z" in out
    assert "automorphism: OK" in out
    assert "euler identity residual = 0" in out
    assert "L = -1/1" in out
    assert "malgrange: no certificate (s = 0)" in out
    assert "not quasitame" in out
    assert "escape trace: contradiction confirmed" in out


def test_family_verify_reports_malgrange_failure(capsys):
    code, out, _ = run_cli(capsys, "family", "-n", "2", "-q", "1", "--verify")
    assert code == 0
    assert "malgrange: FAILS at t0 = 0" in out
    assert "L = -2/1" in out


# -- curve ----------------------------------------------------------------------


def test_curve_with_the_builtin_witness(capsys):
    code, out, _ = run_cli(capsys, "curve", "--family", "1", "1", "--psi")
    assert code == 0
    assert "L = -1/1" in out
    assert "malgrange: no certificate (s = 0)" in out


def test_curve_on_a_two_variable_example(capsys):
    code, out, _ = run_cli(
        capsys, "curve", "--poly", "x^2*y + x", "--vars", "x,y",
        "--curve", "t, -1/2*t^-1",
    )
    assert code == 0
    assert "L = -2/1" in out
    assert "malgrange: FAILS at t0 = 0" in out


def test_curve_dimension_mismatch_exit_code(capsys):
    code, _, err = run_cli(
        capsys, "curve", "--poly", "x + y", "--vars", "x,y", "--curve", "t^-1, t, 0"
    )
    assert code == 3
    assert "error:" in err


def test_curve_parse_error_exit_code(capsys):
    code, _, err = run_cli(capsys, "curve", "--poly", "x +", "--vars", "x", "--curve", "t^-1")
    assert code == 2
    assert "error:" in err


def test_curve_that_does_not_escape_exit_code(capsys):
    code, _, err = run_cli(capsys, "curve", "--poly", "x", "--vars", "x", "--curve", "t")
    assert code == 2
    assert "does not escape" in err


def test_psi_requires_family_source(capsys):
    code, _, err = run_cli(capsys, "curve", "--poly", "x", "--vars", "x", "--psi")
    assert code == 2
    assert "--psi requires" in err


# -- exponent ----------------------------------------------------------------------


EXPONENT_FAST = [
    "exponent", "--poly", "x", "--vars", "x",
    "--rmin", "2", "--rmax", "8", "--count", "3", "--starts", "1", "--max-iters", "1",
]


def test_exponent_csv_contract(capsys):
    code, out, _ = run_cli(capsys, *EXPONENT_FAST, "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "r,phi,converged_starts"
    assert len(lines) == 4
    assert lines[1].startswith("2.0,")


def test_exponent_text_reports_the_slope(capsys):
    code, out, _ = run_cli(capsys, *EXPONENT_FAST)
    assert code == 0
    assert "slope = " in out
    assert "samples used = 3/3" in out


def test_numeric_failure_exit_code(capsys):
    # Above ~1e38 the double-precision objective for x^9 overflows at the
    # first start point, which must surface as a numeric error, not a crash.
    code, _, err = run_cli(
        capsys, "malgrange", "--poly", "x^9", "--vars", "x",
        "--radii", "10,1e40", *CHEAP,
    )
    assert code == 4
    assert "not finite" in err


# -- probes --------------------------------------------------------------------------


def test_mtame_text_output(capsys):
    code, out, _ = run_cli(
        capsys, "mtame", "--poly", "x", "--vars", "x", "--radii", "2,4", *CHEAP
    )
    assert code == 0
    assert "scaled-gradient points" in out
    assert "verdict:" in out


def test_malgrange_rejects_single_radius(capsys):
    code, _, err = run_cli(
        capsys, "malgrange", "--poly", "x", "--vars", "x", "--radii", "10", *CHEAP
    )
    assert code == 2
    assert "at least two radii" in err


# -- verify -----------------------------------------------------------------------------


def test_verify_single_cell(capsys):
    code, out, _ = run_cli(capsys, "verify", "--n-max", "1", "--q-max", "1")
    assert code == 0
    assert "n=1 q=1: PASS" in out
    assert "1/1 cells passed" in out


def test_verify_detects_injected_mutation(capsys):
    code, out, _ = run_cli(
        capsys, "verify", "--n-max", "1", "--q-max", "1", "--inject-mutation"
    )
    assert code == 1
    assert "FAIL [" in out


def test_verify_csv_header(capsys):
    code, out, _ = run_cli(
        capsys, "verify", "--n-max", "1", "--q-max", "1", "--format", "csv"
    )
    assert code == 0
    assert out.splitlines()[0] == "n,q,passed,failed_checks"


# -- json envelope -----------------------------------------------------------------------


def test_family_json_round_trips(capsys):
    doc = run_json(capsys, "family", "-n", "1", "-q", "1")
    assert set(doc) == {"version", "subcommand", "input", "payload", "wall_time_s"}
    assert doc["subcommand"] == "family"
    assert parse_poly(doc["payload"]["f"]) == family(1, 1)


def test_family_verify_json(capsys):
    doc = run_json(capsys, "family", "-n", "2", "-q", "1", "--verify")
    payload = doc["payload"]
    assert payload["exponent"] == "-2/1"
    assert payload["malgrange"]["fails"] is True
    assert payload["malgrange"]["t0"] == {"re": 0.0, "im": 0.0}
    assert payload["quasitame"]["not_quasitame"] is True
    assert payload["escape_trace"]["contradiction"] is True


def test_curve_json(capsys):
    doc = run_json(capsys, "curve", "--family", "1", "2", "--psi")
    assert doc["payload"]["exponent"] == "-1/2"
    assert doc["payload"]["malgrange"]["fails"] is False


def test_exponent_json(capsys):
    doc = run_json(capsys, *EXPONENT_FAST)
    assert doc["payload"]["used"] == 3
    assert len(doc["payload"]["samples"]) == 3
    assert doc["input"]["config"]["seed"] == 0


def test_mtame_json(capsys):
    doc = run_json(
        capsys, "mtame", "--poly", "x", "--vars", "x", "--radii", "2,4", *CHEAP
    )
    assert doc["payload"]["increasing"] is True


def test_malgrange_json(capsys):
    doc = run_json(
        capsys, "malgrange", "--poly", "x", "--vars", "x", "--radii", "2,4", *CHEAP
    )
    assert doc["payload"]["decreasing"] is False


def test_verify_json(capsys):
    doc = run_json(capsys, "verify", "--n-max", "1", "--q-max", "1")
    assert doc["payload"]["all_pass"] is True
    assert doc["payload"]["cells"][0]["checks"]["witness_exponent"] is True


def test_output_flag_writes_a_file(capsys, tmp_path):
    target = tmp_path / "report.json"
    code, out, _ = run_cli(
        capsys, "family", "-n", "1", "-q", "1", "--format", "json",
        "--output", str(target),
    )
    assert code == 0
    assert out == ""
    doc = json.loads(target.read_text())
    jsonschema.validate(doc, SCHEMA)
    assert doc["payload"]["f"] == F11_TEXT


def test_unwritable_output_is_an_input_error(capsys, tmp_path):
    code, _, err = run_cli(
        capsys, "family", "-n", "1", "-q", "1",
        "--output", str(tmp_path / "missing" / "report.txt"),
    )
    assert code == 2
    assert "cannot write output file" in err


# -- argparse behavior ----------------------------------------------------------------------


def test_missing_arguments_exit_two(capsys):
    assert main(["family"]) == 2
    capsys.readouterr()
    assert main([]) == 2
    capsys.readouterr()


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    out = capsys.readouterr().out
    assert "family" in out and "verify" in out


def test_poly_and_family_are_mutually_exclusive(capsys):
    code = main(["curve", "--poly", "x", "--family", "1", "1", "--psi"])
    capsys.readouterr()
    assert code == 2


# -- config resolution -----------------------------------------------------------------------


def _args(**kw):
    kw.setdefault("config", None)
    return SimpleNamespace(**kw)


def test_config_defaults():
    cfg = resolve_opt_config(_args(), environ={})
    assert cfg.seed == 0
    assert cfg.starts == 64


def test_env_seed_applies():
    cfg = resolve_opt_config(_args(), environ={"LOJ_SEED": "7"})
    assert cfg.seed == 7


def test_config_file_beats_env(tmp_path):
    path = tmp_path / "opt.cfg"
    path.write_text("seed = 5\nstarts = 12  # comment\n")
    cfg = resolve_opt_config(_args(config=str(path)), environ={"LOJ_SEED": "7"})
    assert cfg.seed == 5
    assert cfg.starts == 12


def test_flag_beats_config_file_and_env(tmp_path):
    path = tmp_path / "opt.cfg"
    path.write_text("seed = 5\n")
    cfg = resolve_opt_config(
        _args(config=str(path), seed=3), environ={"LOJ_SEED": "7"}
    )
    assert cfg.seed == 3


def test_invalid_env_seed():
    with pytest.raises(InputError, match="LOJ_SEED must be an integer"):
        resolve_opt_config(_args(), environ={"LOJ_SEED": "abc"})


def test_invalid_env_seed_exit_code(capsys, monkeypatch):
    monkeypatch.setenv("LOJ_SEED", "abc")
    code, _, err = run_cli(capsys, *EXPONENT_FAST)
    assert code == 2
    assert "LOJ_SEED" in err


def test_env_seed_changes_the_reported_config(capsys, monkeypatch):
    monkeypatch.setenv("LOJ_SEED", "11")
    doc = run_json(capsys, *EXPONENT_FAST)
    assert doc["input"]["config"]["seed"] == 11


def test_config_file_errors(tmp_path):
    bad_key = tmp_path / "bad_key.cfg"
    bad_key.write_text("sparts = 3\n")
    with pytest.raises(InputError, match="unknown config key"):
        resolve_opt_config(_args(config=str(bad_key)), environ={})
    bad_line = tmp_path / "bad_line.cfg"
    bad_line.write_text("starts\n")
    with pytest.raises(InputError, match="expected key=value"):
        resolve_opt_config(_args(config=str(bad_line)), environ={})
    bad_value = tmp_path / "bad_value.cfg"
    bad_value.write_text("starts = many\n")
    with pytest.raises(InputError, match="invalid value"):
        resolve_opt_config(_args(config=str(bad_value)), environ={})
    with pytest.raises(InputError, match="cannot read config file"):
        resolve_opt_config(_args(config=str(tmp_path / "missing.cfg")), environ={})


# -- module execution --------------------------------------------------------------------------


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "lojexp", "family", "-n", "1", "-q", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout == F11_TEXT + "\n"
