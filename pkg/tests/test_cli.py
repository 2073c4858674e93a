import io
import json
import pathlib
import subprocess
import sys
from fractions import Fraction

import pytest

from odeseries import cli
from odeseries.exprkernel import parse

DATA = pathlib.Path(__file__).parent / "data"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_solve2_text_default():
    code, out, _ = run("solve2", "--a", "x", "--terms", "7", "--format", "text")
    assert code == 0
    y1 = next(line for line in out.splitlines() if line.startswith("y1 = "))
    assert y1.endswith("- x^3/6 - 1")
    assert "x^24/25486372251648000" in y1
    assert "xi_1(-1) = -x^6/180" in out


def test_xi_single_value():
    code, out, _ = run("xi", "--a", "x", "--k", "1", "--arg", "-1")
    assert (code, out) == (0, "-x^6/180\n")
    code, out, _ = run("xi", "--a", "x", "--k", "1", "--arg", "-1", "--format", "latex")
    assert out.strip() == "-\\frac{x^{6}}{180}"


def test_solve2_golden_json():
    code, out, _ = run("solve2", "--a", "x", "--terms", "3", "--format", "json", "--grid", "1:2:3")
    assert code == 0
    assert out == (DATA / "solve2_airy_N3.json").read_text()


def _round_trip(report):
    center = Fraction(report["problem"]["center"])
    exprs = [row["expr"] for key in ("xi", "alpha", "solutions") for row in report[key]]
    assert exprs
    for text in exprs:
        from odeseries.exprkernel import format_expr

        assert format_expr(parse(text, center)) == text


@pytest.mark.parametrize("argv", [
    ("solve2", "--a", "ln(x+1)", "--terms", "2"),
    ("solve2", "--a", "exp(x)", "--terms", "3"),
    ("solve2g", "--a1", "2", "--a2", "x - 1", "--terms", "2"),
    ("solvem", "--order", "3", "--coeff", "a3=ln(x)", "--terms", "1"),
    ("solvem", "--order", "2", "--coeff", "a1=x", "--coeff", "a2=x^2", "--terms", "2"),
])
def test_json_schema_and_round_trip(argv):
    code, out, _ = run(*argv, "--format", "json")
    assert code == 0
    rep = json.loads(out)
    assert set(rep) >= {"problem", "xi", "alpha", "solutions", "residual"}
    for row in rep["xi"]:
        assert isinstance(row["s"], int) and isinstance(row["n"], int)
    for row in rep["residual"]:
        assert isinstance(row["x"], float)
        assert row["delta"] == "undefined" or row["delta"] >= 0
    xs = [row["x"] for row in rep["residual"]]
    assert xs == sorted(xs)
    _round_trip(rep)


def test_shifted_center_is_inferred():
    code, out, _ = run("solve2", "--a", "1/(x+1)^2", "--terms", "1", "--format", "json")
    rep = json.loads(out)
    assert rep["problem"]["center"] == "-1"
    assert rep["xi"][0]["expr"] == "ln(x + 1)" or parse(rep["xi"][0]["expr"], -1) == parse("ln(x+1)")
    assert [row["x"] for row in rep["residual"]] == [0.0, 1.0, 2.0, 3.0, 4.0]


def test_output_is_deterministic():
    argv = ("solvem", "--order", "3", "--coeff", "a3=x", "--terms", "2", "--format", "json")
    assert run(*argv)[1] == run(*argv)[1]


def test_csv_output():
    code, out, _ = run("solve2", "--a", "x", "--terms", "2", "--format", "csv", "--grid", "0:1:3")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "x,delta"
    assert len(lines) == 4
    assert lines[1] == "0,undefined"


def test_latex_output():
    code, out, _ = run("solve2", "--a", "x", "--terms", "1", "--format", "latex")
    assert code == 0
    assert "\\[ y_{1} = " in out


def test_solvem_lhs_sign_convention():
    a = run("solvem", "--order", "3", "--coeff", "a3=x", "--terms", "2", "--format", "json")[1]
    b = run("solvem", "--order", "3", "--coeff", "a3=-x", "--lhs", "--terms", "2",
            "--format", "json")[1]
    assert json.loads(a)["solutions"] == json.loads(b)["solutions"]


def test_particular_symbolic():
    code, out, _ = run("particular", "--order", "2", "--coeff", "b2=-1", "--rhs", "exp(2*x)",
                       "--homog", "exp(x)", "--format", "json")
    assert code == 0
    rep = json.loads(out)
    assert rep["problem"]["method"] == "symbolic"
    assert rep["solutions"][0]["expr"] == "exp(2*x)/3"
    assert all(row["delta"] == 0 for row in rep["residual"])


def test_particular_numeric_values():
    code, out, _ = run("particular", "--order", "2", "--coeff", "b2=-1", "--rhs", "1",
                       "--homog", "exp(x)", "--approximate", "--grid", "0:1:11",
                       "--format", "json")
    assert code == 0
    rep = json.loads(out)
    assert rep["problem"]["method"] == "numeric"
    assert len(rep["values"]) == 11


def test_solution_selector():
    code, out, _ = run("solve2", "--a", "x", "--terms", "2", "--solution", "2", "--format", "json")
    assert code == 0
    assert json.loads(out)["problem"]["residual_solution"] == 2
    code, _, err = run("solve2", "--a", "x", "--solution", "3")
    assert code == 2 and "solution" in err


@pytest.mark.parametrize("argv, code", [
    (("solve2", "--a", "x +* 1"), 2),
    (("solve2", "--a", "x", "--grid", "1:2"), 2),
    (("solvem", "--order", "3", "--coeff", "q1=x"), 2),
    (("solvem", "--order", "3", "--coeff", "a4=x"), 2),
    (("solve2", "--a", "exp(x)*sin(x)"), 3),
    (("solve2", "--a", "ln(x) + ln(x+1)"), 3),
    (("particular", "--order", "2", "--coeff", "b2=-1", "--rhs", "1", "--homog", "x",
      "--approximate"), 3),
    (("particular", "--order", "2", "--coeff", "b2=-1", "--rhs", "1", "--homog", "exp(2*x)"), 1),
    (("solve2", "--a", "x", "--digits", "10"), 2),
    (("frobnicate",), 2),
])
def test_exit_codes(argv, code):
    got, _, err = run(*argv)
    assert got == code
    if code != 0 and argv[0] != "frobnicate" and "--digits" not in argv:
        assert err.strip()


def test_selftest_passes():
    code, out, _ = run("selftest", "crosscheck")
    assert code == 0
    assert "30/30" in out


def test_selftest_failure_exit(monkeypatch):
    monkeypatch.setattr(cli, "closed_form_suite", lambda: (3, ["broken"]))
    code, out, _ = run("selftest", "closedforms")
    assert code == 4
    assert "FAILED broken" in out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "odeseries", "xi", "--a", "exp(x)", "--k", "0",
                           "--arg", "-1"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "-exp(x)"
