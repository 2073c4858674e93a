"""Residual measurement and independent oracles."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import List, Optional, Sequence, Tuple

import mpmath

from .exprkernel import (
    WORKING_DPS,
    DomainError,
    Expr,
    differentiate,
    evaluate,
    monomial,
    parse,
)
from .morder import XiMatrix
from .nimage2 import Multiplier, XiTable

__all__ = [
    "ResidualReport",
    "residual_expr",
    "residual_report",
    "airy_oracle",
    "exp_oracle",
    "euler_series",
    "crosscheck_m2",
    "GOLDEN",
    "golden_coeffs",
    "leibniz_suite",
    "closed_form_suite",
    "crosscheck_suite",
]


@dataclass
class ResidualReport:
    """delta(x) = |(Y^(m) - sum a_p Y^(m-p)) / (a_m Y)| on a grid.

    A sample holds None where the denominator vanishes or Y is undefined.
    """

    samples: List[Tuple[object, Optional[mpmath.mpf]]] = field(default_factory=list)

    @property
    def max_delta(self):
        vals = [d for _, d in self.samples if d is not None]
        return max(vals) if vals else None


def residual_expr(coeffs: Sequence[Expr], y: Expr,
                  gauge: Optional[Multiplier] = None) -> Tuple[Expr, Expr]:
    """(numerator, denominator) of delta, exact.  With a gauge, y is the
    reduced factor z of Y = exp(phi) z and both parts are divided by exp(phi)."""
    m = len(coeffs)
    if gauge is not None:
        d = gauge.derivative_chain(y, m)
    else:
        d = [y]
        for _ in range(m):
            d.append(differentiate(d[-1]))
    num = d[m]
    for p in range(1, m + 1):
        num = num - coeffs[p - 1] * d[m - p]
    return num, coeffs[m - 1] * y


def residual_report(coeffs: Sequence[Expr], y: Expr, grid: Sequence,
                    gauge: Optional[Multiplier] = None,
                    dps: int = WORKING_DPS) -> ResidualReport:
    num, den = residual_expr(coeffs, y, gauge)
    rep = ResidualReport()
    with mpmath.workdps(dps):
        for x in grid:
            try:
                dv = evaluate(den, x, dps)
                nv = evaluate(num, x, dps)
            except DomainError:
                rep.samples.append((x, None))
                continue
            if dv == 0:
                rep.samples.append((x, None))
                continue
            rep.samples.append((x, abs(_mp(nv) / _mp(dv))))
    return rep


def _mp(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


def airy_oracle(K: int) -> Tuple[List[int], List[int]]:
    """B(k), H(k): y1 has -x^(3k)/B(k) and y2 has x^(3k+1)/H(k) for y'' = x y."""
    B, H = [1], [1]
    for k in range(K):
        j = k + 1
        B.append((9 * j * j - 3 * j) * B[-1])
        H.append((3 * j + 9 * j * j) * H[-1])
    return B, H


def exp_oracle(K: int) -> Tuple[List[int], List[Fraction]]:
    """For y'' = e^x y: y1 has -e^(kx)/B(k), y2 has (x/B(k) - F(k)) e^(kx)."""
    B, F = [], []
    harmonic = Fraction(0)
    for k in range(K + 1):
        if k:
            harmonic += Fraction(1, k)
        b = factorial(k) ** 2
        B.append(b)
        F.append(2 * harmonic / b)
    return B, F


def euler_series(N: int, b0: Fraction = Fraction(871), b1: Fraction = Fraction(481)) -> Expr:
    """sum_{i<=N} c_i ln(x+1)^i from i(i-1)c_i = (i-1)c_(i-1) + c_(i-2); solves
    y'' = y/(x+1)^2."""
    c = [Fraction(b0), Fraction(b1)]
    for i in range(2, N + 1):
        c.append(((i - 1) * c[i - 1] + c[i - 2]) / (i * (i - 1)))
    terms = {}
    for i, ci in enumerate(c[:N + 1]):
        if ci:
            terms[(0, i, 0, "", 0)] = ci
    return Expr(terms, center=-1)


def crosscheck_m2(a: Expr, N: int) -> List[Tuple[int, int]]:
    """(s, n) rows where the order-m engine at m = 2 disagrees with the
    second-order engine; empty when they agree."""
    table = XiTable(a)
    matrix = XiMatrix([a.scale(0), a])
    bad = []
    for s in range(N + 1):
        for n in (1, 2):
            if matrix.xi(s, n) != table.xi_neg(s)[n - 1]:
                bad.append((s, n))
    return bad


# name -> (coefficient texts a_1..a_m, center, grid of exact sample points)
GOLDEN = {
    "airy": (["0", "x"], None, [Fraction(k, 4) for k in range(1, 13)]),
    "exp": (["0", "exp(x)"], None, [Fraction(k, 2) for k in range(-6, 5)]),
    "sin": (["0", "sin(x)"], None, [Fraction(k, 4) for k in range(1, 9)]),
    "log": (["0", "ln(x)"], None, [Fraction(k, 4) for k in range(1, 13)]),
    "sqrt": (["0", "(x-2)*sqrt(x)"], None, [Fraction(k, 10) for k in range(1, 11)]),
    "polynomial": (["0", "x^7-1"], None, [Fraction(k, 10) for k in range(1, 11)]),
    "euler": (["0", "1/(x+1)^2"], Fraction(-1), [Fraction(k, 4) for k in range(-2, 5)]),
    "order3_log": (["0", "0", "ln(x)"], None, [Fraction(k, 5) for k in range(2, 6)]),
}


def golden_coeffs(name: str) -> Tuple[Expr, ...]:
    texts, center, _ = GOLDEN[name]
    return tuple(parse(t, center) for t in texts)


# -- identity suites (shared by the CLI self-test and the test suite) -----

def _poly_samples():
    return [parse(t) for t in (
        "x^5 - 3*x^2 + 1", "2*x^4 + x^3 - 7", "x^3/2 - x", "4", "x^5 + x^4 + x^3 + x^2 + x + 1")]


def leibniz_suite(max_n: int = 6, max_k: int = 4, zs=range(-2, 3)) -> Tuple[int, List[str]]:
    """Direct weighted sums against closed forms; returns (checks, failures)."""
    from .leibniz import (WeightSpec, binom_closed, leibniz_sum, nested_identity,
                          power_closed, vieta_coeffs)

    polys = _poly_samples()
    pairs = [(polys[i], polys[(i + 1) % len(polys)]) for i in range(len(polys))]
    checks, bad = 0, []
    for u, v in pairs:
        for n in range(max_n + 1):
            if leibniz_sum(WeightSpec("one"), u, v, n) != differentiate(u * v, n):
                bad.append(f"plain Leibniz n={n}")
            checks += 1
            for k in range(max_k + 1):
                checks += 1
                if leibniz_sum(WeightSpec("power", k), u, v, n) != power_closed(k, u, v, n):
                    bad.append(f"power k={k} n={n} u={u}")
                for z in zs:
                    checks += 1
                    if leibniz_sum(WeightSpec("binom", k, Fraction(z)), u, v, n) != binom_closed(k, z, u, v, n):
                        bad.append(f"binom k={k} z={z} n={n} u={u}")
    for k in range(max_k + 1):
        r = vieta_coeffs(k)
        for i in range(-5, k + 6):
            checks += 1
            falling = 1
            for j in range(k):
                falling *= i - j
            if sum(rs * Fraction(i) ** (k + 1 - s) for s, rs in enumerate(r, 1)) != falling:
                bad.append(f"vieta k={k} i={i}")
    for m in range(4):
        for k0 in (1, 2, 3):
            for n in range(max_n + 1):
                checks += 1
                lhs, rhs = nested_identity(polys + polys, k0, n, m)
                if lhs != rhs:
                    bad.append(f"nested m={m} k0={k0} n={n}")
    return checks, bad


def closed_form_suite(max_p: int = 4, coeffs=("x", "x^2+1")) -> Tuple[int, List[str]]:
    """Top-of-triangle closed forms against both xi routes."""
    from .nimage2 import xi_bruteforce, xi_closed, xi_general

    checks, bad = 0, []
    for text in coeffs:
        a = parse(text)
        table, memo = XiTable(a), {}
        for p in range(1, max_p + 1):
            cases = [("top", p, 2 * p), ("top_odd", p, 2 * p + 1), ("sub1", p - 1, 2 * p)]
            if p >= 2:
                cases.append(("sub2", p - 2, 2 * p))
            for which, k, arg in cases:
                want = xi_closed(a, p, which)
                for route, got in (("general", xi_general(table, k, arg)),
                                   ("bruteforce", xi_bruteforce(a, k, arg, memo))):
                    checks += 1
                    if got != want:
                        bad.append(f"{which} p={p} a={text} via {route}")
    return checks, bad


def crosscheck_suite(N: int = 4, coeffs=("x", "exp(x)", "x^3-1")) -> Tuple[int, List[str]]:
    checks, bad = 0, []
    for text in coeffs:
        checks += 2 * (N + 1)
        bad += [f"a={text} s={s} n={n}" for s, n in crosscheck_m2(parse(text), N)]
    return checks, bad
