from fractions import Fraction

import pytest

from odeseries.exprkernel import const, differentiate, parse
from odeseries.verify import (
    GOLDEN,
    ResidualReport,
    airy_oracle,
    closed_form_suite,
    crosscheck_suite,
    euler_series,
    exp_oracle,
    golden_coeffs,
    leibniz_suite,
    residual_expr,
    residual_report,
)


def test_airy_oracle_values():
    B, H = airy_oracle(3)
    assert B == [1, 6, 180, 12960]
    assert H == [1, 12, 504, 45360]


def test_exp_oracle_values():
    B, F = exp_oracle(4)
    assert B == [1, 1, 4, 36, 576]
    assert F[:3] == [0, 2, Fraction(3, 4)]
    assert F[3] == Fraction(11, 108)
    assert F[4] == Fraction(25, 3456)


def test_euler_series_recurrence_leaves_only_a_tail():
    N = 8
    y = euler_series(N)
    num, _ = residual_expr((const(0, -1), parse("1/(x+1)^2", -1)), y)
    # after multiplying by (x+1)^2 the numerator only holds ln powers N-1 and N
    scaled = num * parse("(x+1)^2", -1)
    assert {sig[1] for sig, _ in scaled.items()} <= {N - 1, N}


def test_euler_series_constant_start():
    y = euler_series(0, Fraction(1), Fraction(0))
    assert y == const(1, -1)


def test_report_skips_zero_denominator_and_domain():
    coeffs = (const(0), parse("ln(x)"))
    y = parse("x")
    rep = residual_report(coeffs, y, [0, Fraction(1), Fraction(2)])
    assert rep.samples[0][1] is None  # ln(0)
    assert rep.samples[1][1] is None  # a(1) * y(1) == 0
    assert rep.samples[2][1] is not None


def test_report_values():
    coeffs = (const(0), parse("1"))
    rep = residual_report(coeffs, parse("exp(x)"), [Fraction(1, 2), 1])
    assert rep.max_delta == 0
    rep = residual_report(coeffs, parse("x^2"), [1])
    assert float(rep.max_delta) == pytest.approx(1.0)


def test_empty_report():
    assert ResidualReport().max_delta is None


def test_residual_expression_with_gauge():
    from odeseries.nimage2 import Multiplier

    gauge = Multiplier(parse("x"))
    num, den = residual_expr((parse("2"), parse("-1")), const(1), gauge)
    # y = e^x solves y'' = 2y' - y
    assert num.is_zero()
    assert den == parse("-1")


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_golden_coefficients_parse(name):
    coeffs = golden_coeffs(name)
    texts, center, grid = GOLDEN[name]
    assert len(coeffs) == len(texts)
    assert grid


def test_suites_small():
    for suite, kwargs in ((leibniz_suite, dict(max_n=3, max_k=2, zs=(0, 1))),
                          (closed_form_suite, dict(max_p=2)),
                          (crosscheck_suite, dict(N=2))):
        checks, bad = suite(**kwargs)
        assert checks > 0
        assert bad == []


def test_differentiate_consistency_for_report():
    y = parse("sin(x)")
    num, _ = residual_expr((const(0), parse("-1")), y)
    assert num.is_zero()
    assert differentiate(y, 2) == -y


def test_euler_series_coefficients():
    y = euler_series(3)
    assert y.coeff(q=0) == 871
    assert y.coeff(q=1) == 481
    assert y.coeff(q=2) == 676
    assert y.coeff(q=3) == Fraction(611, 2)


def test_delta_is_scale_invariant():
    coeffs = (const(0), parse("x"))
    y = parse("x^4/12 + x")
    grid = [Fraction(1, 2), 1, 2]
    base = residual_report(coeffs, y, grid)
    scaled = residual_report(coeffs, y.scale(-7), grid)
    for (_, d1), (_, d2) in zip(base.samples, scaled.samples):
        assert abs(d1 - d2) <= 1e-50 * d1
