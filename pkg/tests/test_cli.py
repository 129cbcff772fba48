"""Command-line interface: parsing, output shapes, exit codes, determinism.

Runs the CLI in-process through main(argv) so coverage and speed stay
reasonable; one subprocess test exercises the installed entry point.
"""

import csv
import io
import json
import subprocess
import sys

import pytest
from mpmath import mpf

from orthoflow import cli
from orthoflow.cli import (
    EXIT_OK,
    EXIT_PRECISION,
    EXIT_TRUST,
    EXIT_USAGE,
    EXIT_VERIFICATION,
    RunConfig,
    main,
    parse_args,
)
from orthoflow.errors import OutsideTrustWindow, PrecisionUnreachable

HERMITE = ["--potential", "2=2"]


def run_cli(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


# -- argument parsing ----------------------------------------------------


def test_parse_args_coeffs():
    cfg = parse_args(["coeffs", "--potential", "2=1.0,4=0.25", "--N", "9",
                      "--format", "csv", "--n-max", "5", "--precision", "192"])
    assert cfg.command == "coeffs"
    assert cfg.potential == "2=1.0,4=0.25"
    assert cfg.N == 9
    assert cfg.n_max == 5
    assert cfg.fmt == "csv"
    assert cfg.precision == 192
    assert cfg.seed == 7


def test_parse_args_verify_flags():
    cfg = parse_args([
        "verify", "--potential", "4=1", "--n-max", "6", "--k-max", "2",
        "--json", "--only", "string,ode", "--fault-inject", "n=3,delta=1e-10",
        "--tol-bits", "100", "--tol-ode", "1e-9", "--tol-deform", "1e-7",
    ])
    assert cfg.command == "verify"
    assert cfg.json_report is True
    assert cfg.only == "string,ode"
    assert cfg.fault_inject == "n=3,delta=1e-10"
    assert cfg.tol_bits == 100
    assert cfg.tol_ode == "1e-9"
    assert cfg.tol_deform == "1e-7"


def test_parse_args_deform_and_psi():
    cfg = parse_args(["deform", "--potential", "4=1", "--k", "2", "--n", "3",
                      "--delta", "1e-6", "--x", "0.5"])
    assert (cfg.k, cfg.n, cfg.delta, cfg.x) == (2, 3, "1e-6", "0.5")
    cfg = parse_args(["psi", "--potential", "2=2", "--n", "4",
                      "--x-min", "-2", "--x-max", "2", "--points", "9"])
    assert (cfg.n, cfg.x_min, cfg.x_max, cfg.points) == (4, "-2", "2", 9)


def test_runconfig_text_roundtrip():
    cfg = parse_args([
        "verify", "--potential", "2=1.0,4=0.25", "--n-max", "4", "--json",
        "--fault-inject", "n=2,delta=1e-10", "--seed", "3",
    ])
    assert RunConfig.from_text(cfg.to_text()) == cfg
    plain = parse_args(["coeffs", "--potential", "2=2"])
    assert RunConfig.from_text(plain.to_text()) == plain


def test_usage_errors_exit_2(capsys):
    assert main(["badcmd", "--potential", "2=2"]) == EXIT_USAGE
    assert main(["coeffs"]) == EXIT_USAGE  # missing --potential
    assert main(["coeffs", "--potential", "2=2", "--format", "yaml"]) \
        == EXIT_USAGE
    assert main([]) == EXIT_USAGE
    capsys.readouterr()


def test_help_exits_0(capsys):
    assert main(["--help"]) == 0
    out = capsys.readouterr().out
    assert "coeffs" in out and "verify" in out


def test_nonconfining_potential_exits_2(capsys):
    code, _, err = run_cli(capsys, ["coeffs", "--potential", "3=1",
                                    "--N", "6"])
    assert code == EXIT_USAGE
    assert "confining" in err
    code, _, _ = run_cli(capsys, ["coeffs", "--potential", "4=-1",
                                  "--N", "6"])
    assert code == EXIT_USAGE


# -- coeffs --------------------------------------------------------------


def test_coeffs_csv_shape_and_values(capsys):
    code, out, _ = run_cli(capsys, [
        "coeffs", *HERMITE, "--N", "8", "--precision", "192",
        "--format", "csv",
    ])
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["n", "gamma_n", "beta_n", "h_n",
                       "string_diagonal", "string_offdiagonal"]
    assert len(rows) == 1 + 8  # header + n = 0..7
    assert rows[1][0] == "0" and rows[1][1] == "0.0"  # gamma_0 = 0
    # gamma_n = sqrt(n/2)
    for n in (1, 4, 7):
        got = mpf(rows[1 + n][1])
        assert abs(got - mpf(n) ** mpf("0.5") / mpf(2) ** mpf("0.5")) \
            < mpf("1e-50")
    # string residual columns populated inside the trust window
    assert mpf(rows[2][5]) < mpf("1e-50")


def test_coeffs_json_meta(capsys):
    code, out, _ = run_cli(capsys, [
        "coeffs", *HERMITE, "--N", "6", "--precision", "160",
        "--format", "json",
    ])
    assert code == EXIT_OK
    obj = json.loads(out)
    assert obj["potential"] == "2=2.0"
    assert obj["N"] == 6
    assert obj["precision"] == 160
    assert obj["source"] == "moments"
    assert mpf(obj["cross_discrepancy"]) < mpf(2) ** (-140)
    assert len(obj["rows"]) == 6
    assert obj["rows"][0]["h"].startswith("1.772453850905516")


def test_coeffs_deterministic(capsys):
    argv = ["coeffs", *HERMITE, "--N", "6", "--precision", "160",
            "--format", "json"]
    _, first, _ = run_cli(capsys, argv)
    _, second, _ = run_cli(capsys, argv)
    assert first == second


def test_coeffs_nmax_guard(capsys):
    code, _, err = run_cli(capsys, [
        "coeffs", *HERMITE, "--N", "5", "--n-max", "7",
    ])
    assert code == EXIT_USAGE
    assert "n-max" in err


# -- lax -----------------------------------------------------------------


def test_lax_json_hermite_closed_form(capsys):
    code, out, _ = run_cli(capsys, [
        "lax", *HERMITE, "--n", "3", "--precision", "192",
    ])
    assert code == EXIT_OK
    obj = json.loads(out)
    dm = obj["d_matrix"]
    assert dm["a"] == ["0.0", "1.0"]  # a(x) = x exactly
    assert dm["d"] == ["0.0", "-1.0"]
    assert dm["b"][0].startswith("-2.449489742783178")  # -2 gamma_3
    assert dm["c"][0].startswith("2.449489742783178")
    assert mpf(obj["flow_sum_residual"]) < mpf("1e-40")
    assert len(obj["deformation"]) == 1  # deg V' = 1
    u1 = obj["deformation"][0]
    assert u1["k"] == 1
    assert u1["matrix"]["b"][0].startswith("-1.224744871391589")


def test_lax_csv_shape(capsys):
    code, out, _ = run_cli(capsys, [
        "lax", "--potential", "4=1", "--n", "2", "--precision", "160",
        "--format", "csv",
    ])
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    top = 3  # deg V' = 3 caps every entry
    assert rows[0] == ["object", "k", "entry"] + [f"c{j}" for j in range(4)]
    assert len(rows) == 1 + 4 + 4 * 3  # header + D_n + calU_1..3
    assert {r[0] for r in rows[1:]} == {"d_matrix", "deformation"}
    for r in rows[1:]:
        assert len(r) == 3 + top + 1  # padded to common width


def test_lax_requires_valid_n(capsys):
    code, _, _ = run_cli(capsys, ["lax", *HERMITE, "--n", "0"])
    assert code == EXIT_USAGE


def test_lax_trust_violation_exits_5(capsys):
    code, _, err = run_cli(capsys, [
        "lax", "--potential", "4=1", "--n", "5", "--N", "7",
        "--precision", "128",
    ])
    assert code == EXIT_TRUST
    assert "trust" in err


# -- psi -----------------------------------------------------------------


def test_psi_csv_grid(capsys):
    code, out, _ = run_cli(capsys, [
        "psi", *HERMITE, "--n", "2", "--x-min", "-1", "--x-max", "1",
        "--points", "5", "--precision", "160",
    ])
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["x", "psi_2", "fd_derivative"]
    assert len(rows) == 6
    xs = [mpf(r[0]) for r in rows[1:]]
    assert xs[0] == -1 and xs[-1] == 1
    assert all(b > a for a, b in zip(xs, xs[1:]))
    mid = rows[3]  # x = 0: psi_2(0) = -(1/2) pi^(-1/4) / sqrt(1/2)
    want = -mpf("0.5") / (mpf(3.14159265358979) ** mpf("0.25")
                          * mpf("0.5") ** mpf("0.5"))
    assert abs(mpf(mid[1]) - want) < mpf("1e-10")
    assert abs(mpf(mid[2])) < mpf("1e-30")  # even function: slope 0 at 0


def test_psi_json_and_guards(capsys):
    code, out, _ = run_cli(capsys, [
        "psi", *HERMITE, "--n", "1", "--points", "3", "--precision", "128",
        "--format", "json",
    ])
    assert code == EXIT_OK
    obj = json.loads(out)
    assert len(obj["rows"]) == 3
    assert set(obj["rows"][0]) == {"x", "psi", "fd_derivative"}

    assert run_cli(capsys, ["psi", *HERMITE, "--n", "9", "--N", "6"])[0] \
        == EXIT_USAGE
    assert run_cli(capsys, ["psi", *HERMITE, "--n", "1", "--points", "1"])[0] \
        == EXIT_USAGE
    assert run_cli(capsys, ["psi", *HERMITE, "--n", "1", "--x-min", "2",
                            "--x-max", "-2"])[0] == EXIT_USAGE


# -- verify --------------------------------------------------------------

FAST_VERIFY = ["verify", *HERMITE, "--n-max", "3", "--precision", "192",
               "--only", "string,flow_sum,coefficient_consistency"]


def test_verify_text_passes(capsys):
    code, out, _ = run_cli(capsys, FAST_VERIFY)
    assert code == EXIT_OK
    assert "PASS" in out
    assert "FAIL" not in out
    assert out.rstrip().endswith("0 failed")


def test_verify_json_report(capsys):
    code, out, _ = run_cli(capsys, FAST_VERIFY + ["--json"])
    assert code == EXIT_OK
    obj = json.loads(out)
    assert obj["passed"] is True
    assert obj["counts"]["fail"] == 0
    names = {c["name"] for c in obj["checks"]}
    assert names == {"string_diagonal", "string_offdiagonal", "flow_sum",
                     "coefficient_consistency"}


def test_verify_json_deterministic(capsys):
    _, first, _ = run_cli(capsys, FAST_VERIFY + ["--json"])
    _, second, _ = run_cli(capsys, FAST_VERIFY + ["--json"])
    assert first == second


def test_verify_fault_exits_4(capsys):
    code, out, _ = run_cli(capsys, [
        "verify", *HERMITE, "--n-max", "4", "--precision", "192",
        "--only", "string", "--fault-inject", "n=2,delta=1e-10", "--json",
    ])
    assert code == EXIT_VERIFICATION
    obj = json.loads(out)
    assert obj["passed"] is False
    assert obj["fault"].startswith("gamma_2")
    bad = [c for c in obj["checks"] if not c["passed"]]
    assert {c["indices"]["n"] for c in bad} == {2}


def test_verify_bad_fault_spec_exits_2(capsys):
    code, _, err = run_cli(capsys, [
        "verify", *HERMITE, "--fault-inject", "oops",
    ])
    assert code == EXIT_USAGE
    assert "fault" in err


# -- deform --------------------------------------------------------------


def test_deform_pass_line(capsys):
    code, out, _ = run_cli(capsys, [
        "deform", *HERMITE, "--k", "1", "--n", "2", "--N", "8",
        "--precision", "160",
    ])
    assert code == EXIT_OK
    assert out.startswith("PASS deformation k=1 n=2")
    assert "residual=" in out


def test_deform_json(capsys):
    code, out, _ = run_cli(capsys, [
        "deform", *HERMITE, "--k", "1", "--n", "2", "--N", "8",
        "--precision", "160", "--x", "0.75", "--format", "json",
    ])
    assert code == EXIT_OK
    obj = json.loads(out)
    assert obj["passed"] is True
    assert obj["k"] == 1 and obj["n"] == 2
    assert mpf(obj["residual"]) < mpf(obj["tolerance"])


def test_deform_guards(capsys):
    assert run_cli(capsys, ["deform", *HERMITE, "--k", "0", "--n", "2"])[0] \
        == EXIT_USAGE


# -- exception-to-exit-code mapping --------------------------------------


def test_precision_failure_maps_to_3(monkeypatch, capsys):
    def boom(cfg):
        raise PrecisionUnreachable(mpf("1e-30"), mpf("1e-5"), "test path")

    monkeypatch.setitem(cli._HANDLERS, "coeffs", boom)
    code, _, err = run_cli(capsys, ["coeffs", *HERMITE])
    assert code == EXIT_PRECISION
    assert "precision failure" in err


def test_trust_violation_maps_to_5(monkeypatch, capsys):
    def boom(cfg):
        raise OutsideTrustWindow(9, 9, 5)

    monkeypatch.setitem(cli._HANDLERS, "coeffs", boom)
    code, _, err = run_cli(capsys, ["coeffs", *HERMITE])
    assert code == EXIT_TRUST
    assert "trust-window violation" in err


def test_dispatch_unknown_command():
    cfg = RunConfig(command="nope", potential="2=2")
    assert cli.dispatch(cfg) == EXIT_USAGE


# -- installed entry point ----------------------------------------------


def test_entry_point_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "orthoflow.cli", "coeffs", "--potential",
         "2=2", "--N", "6", "--precision", "128", "--format", "csv"],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("n,gamma_n,beta_n,h_n")


def test_console_script_installed():
    proc = subprocess.run(
        ["orthoflow", "--help"], capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0
    assert "verify" in proc.stdout