from fractions import Fraction

import pytest

from odeseries.exprkernel import UnsupportedCombination, const, differentiate, evaluate, monomial, parse
from odeseries.nimage2 import (
    GeneralODE2,
    Multiplier,
    NonInvertibleWronskian,
    XiTable,
    adjoint2,
    assemble2,
    coeffs_from_solutions,
    g_op,
    nimage_forward,
    p_op,
    reduce_to_normal,
    xi_bruteforce,
    xi_closed,
    xi_general,
)
from odeseries.verify import airy_oracle, residual_expr


def test_zero_coefficient_gives_unit_solutions():
    sol = assemble2(const(0), 5)
    assert sol.y1 == const(-1)
    assert sol.y2 == parse("x")


@pytest.mark.parametrize("text", ["x", "ln(x)", "x^2+1"])
def test_wronskian_at_base_point(text):
    sol = assemble2(parse(text), 3)
    y1, y2 = sol.y1, sol.y2
    w = y1 * differentiate(y2) - y2 * differentiate(y1)
    if text == "ln(x)":
        # every row is a multiple of x^2 or higher, so the limit at 0 is -1
        assert evaluate(w, Fraction(1, 10 ** 6)) == pytest.approx(-1, abs=1e-6)
    else:
        assert evaluate(w, 0) == -1


def test_airy_truncation_residual_is_one_monomial():
    a = parse("x")
    B, _ = airy_oracle(5)
    for N in range(4):
        sol = assemble2(a, N)
        num, _ = residual_expr((const(0), a), sol.y1)
        assert num == monomial(Fraction(1, B[N + 1]), r=3 * N + 4)


def test_exp_rows_by_recurrence():
    t = XiTable(parse("exp(x)"))
    assert t.xi_neg(1) == (parse("-exp(2*x)/4"), parse("-3*exp(2*x)/4"))
    assert t.xi_neg(2)[1] == parse("-11*exp(3*x)/108")


def test_reduction_to_normal_form():
    reduced, gauge = reduce_to_normal(GeneralODE2(parse("x"), parse("x^2")))
    assert reduced.a == parse("5*x^2/4 - 1/2")
    assert gauge.exponent == parse("x^2/4")
    with pytest.raises(UnsupportedCombination):
        gauge.as_expr()


def test_reduction_with_constant_first_coefficient():
    a1, a2 = parse("2"), parse("x - 1")
    reduced, gauge = reduce_to_normal(GeneralODE2(a1, a2))
    assert reduced.a == parse("x")
    assert gauge.as_expr() == parse("exp(x)")
    z = assemble2(reduced.a, 4).y1
    y = gauge.as_expr() * z
    resid = differentiate(y, 2) - a1 * differentiate(y) - a2 * y
    num, _ = residual_expr((a1, a2), z, gauge)
    assert resid == gauge.as_expr() * num
    B, _ = airy_oracle(5)
    assert num == monomial(Fraction(1, B[5]), r=16)


def test_multiplier_chain_matches_product():
    gauge = Multiplier(parse("3*x"))
    z = parse("x^2 + 1")
    chain = gauge.derivative_chain(z, 3)
    y = gauge.as_expr() * z
    for k, d in enumerate(chain):
        assert gauge.as_expr() * d == differentiate(y, k)


def test_adjoint_is_involution():
    ode = GeneralODE2(parse("x^2"), parse("exp(x)"))
    assert adjoint2(adjoint2(ode)) == ode


@pytest.mark.parametrize("n", range(5))
def test_forward_image_matches_solution_route(n):
    ode = GeneralODE2(parse("3"), parse("-2"))
    y1, y2 = parse("exp(x)"), parse("exp(2*x)")
    assert nimage_forward(ode, n) == coeffs_from_solutions(y1, y2, n)


def test_forward_image_holds_on_solutions():
    ode = GeneralODE2(const(0), parse("-1"))
    for n in range(6):
        al, be = nimage_forward(ode, n)
        for y in (parse("sin(x)"), parse("cos(x)")):
            assert differentiate(y, n + 2) == al * differentiate(y) + be * y


def test_dependent_solutions_raise():
    with pytest.raises(NonInvertibleWronskian):
        coeffs_from_solutions(parse("exp(x)"), parse("2*exp(x)"), 1)
    with pytest.raises(NonInvertibleWronskian):
        coeffs_from_solutions(parse("x + 1"), parse("x^2"), 1)


def test_g_and_p_operators():
    a = parse("x")
    assert g_op(a, 0, a) == a
    assert g_op(a, 1, a) == parse("x^4/6")
    assert p_op(a, 0) == const(0)
    assert p_op(a, 1) == parse("x") * parse("x^4/24")


@pytest.mark.parametrize("text", ["x", "exp(x)", "x^2+1"])
def test_general_route_agrees_at_negative_arguments(text):
    t = XiTable(parse(text))
    for k in range(4):
        x1, x2 = t.xi_neg(k)
        assert xi_general(t, k, -1) == x1
        assert xi_general(t, k, -2) == x2


@pytest.mark.parametrize("text", ["x", "x^3 - x", "exp(2*x)"])
def test_bruteforce_agrees_with_general(text):
    a = parse(text)
    t, memo = XiTable(a), {}
    for k in range(4):
        for p in range(2 * k, 2 * k + 4):
            assert xi_bruteforce(a, k, p, memo) == xi_general(t, k, p), (k, p)


def test_zeroth_row_is_scaled_derivative():
    a = parse("x^3")
    t = XiTable(a)
    assert xi_general(t, 0, 3) == parse("18*x")
    assert xi_general(t, 0, 1) == a


def test_closed_forms():
    a = parse("x")
    assert xi_closed(a, 3, "top").is_zero()
    assert xi_closed(a, 3, "top_odd") == parse("x^4")
    assert xi_closed(a, 2, "sub1") == parse("6*x")
    with pytest.raises(ValueError):
        xi_closed(a, 1, "sub2")
    with pytest.raises(ValueError):
        xi_closed(a, 2, "middle")
    with pytest.raises(ValueError):
        xi_bruteforce(a, 2, 3)
