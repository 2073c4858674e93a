from fractions import Fraction
from math import factorial

import pytest

from odeseries.exprkernel import const, differentiate, parse
from odeseries.morder import ODEm, XiMatrix, adjoint_m, assemble_m, nimage_forward_m
from odeseries.nimage2 import GeneralODE2, XiTable, nimage_forward
from odeseries.verify import crosscheck_m2, residual_report

Z = const(0)


@pytest.mark.parametrize("texts", [
    ["x", "exp(x)", "x^2"],
    ["0", "ln(x)", "0", "x^3", "sqrt(x)"],
    ["1", "2", "3", "4", "5", "6", "x"],
])
def test_adjoint_is_involution(texts):
    a = tuple(parse(t) for t in texts)
    assert adjoint_m(ODEm(adjoint_m(ODEm(a)))) == a


def test_adjoint_of_pure_last_coefficient():
    for m in (3, 4, 5):
        a = (Z,) * (m - 1) + (parse("x"),)
        assert adjoint_m(ODEm(a))[-1] == parse("x").scale((-1) ** m)


def test_forward_image_matches_second_order():
    a1, a2 = parse("x"), parse("exp(x)")
    for n in range(4):
        assert nimage_forward_m(ODEm((a1, a2)), n) == nimage_forward(GeneralODE2(a1, a2), n)


def test_forward_image_on_solutions():
    # y''' = 6y'' - 11y' + 6y has e^x, e^2x, e^3x
    ode = ODEm((parse("6"), parse("-11"), parse("6")))
    for n in range(4):
        c = nimage_forward_m(ode, n)
        for k in (1, 2, 3):
            y = parse(f"exp({k}*x)")
            rhs = sum((c[p - 1] * differentiate(y, 3 - p) for p in (1, 2, 3)), Z)
            assert differentiate(y, 3 + n) == rhs


@pytest.mark.parametrize("m", [1, 2, 3, 5])
def test_zero_coefficients_give_scaled_monomials(m):
    sol = assemble_m(XiMatrix([Z] * m), 3)
    for i, y in enumerate(sol.solutions, 1):
        assert y == parse("x").__pow__(i - 1).scale(Fraction((-1) ** i, factorial(i - 1)))


def test_second_order_crosscheck_with_shift():
    assert crosscheck_m2(parse("ln(x+1)"), 3) == []


def test_rows_match_second_order_table():
    a = parse("x^2 - x")
    M, t = XiMatrix([Z, a]), XiTable(a)
    for s in range(4):
        assert (M.xi(s, 1), M.xi(s, 2)) == t.xi_neg(s)


def test_alpha_is_row_sum():
    M = XiMatrix([Z, Z, parse("x")])
    assert M.alpha(2, 2) == M.xi(0, 2) + M.xi(1, 2) + M.xi(2, 2)


def test_mixed_coefficient_order_three():
    a = (parse("x"), Z, parse("1"))
    M = XiMatrix.from_ode(ODEm(a))
    grid = [Fraction(k, 4) for k in range(1, 5)]
    prev = None
    for N in (1, 2, 3):
        sol = assemble_m(M, N)
        d = max(residual_report(a, y, grid).max_delta for y in sol.solutions)
        if prev is not None:
            assert d < prev
        prev = d


def test_closing_second_order_example():
    sol = assemble_m(XiMatrix.from_ode(ODEm((parse("x"), parse("x^2")))), 4)
    want = parse("-x^20/8089804800 - 5267*x^18/555761606400 - 54287*x^16/186810624000"
                 " - 199*x^14/43243200 - 571*x^12/11975040 - 41*x^10/113400"
                 " - 3*x^8/1120 - x^6/90 - x^4/12 - 1")
    assert sol.solutions[0] == want


def test_center_is_shared():
    M = XiMatrix([const(0), parse("1/(x+1)^2")])
    assert M.center == -1
    assert M.xi(0, 1) == parse("ln(x+1)")


def test_empty_inputs_rejected():
    with pytest.raises(ValueError):
        ODEm(())
    with pytest.raises(ValueError):
        XiMatrix([])
