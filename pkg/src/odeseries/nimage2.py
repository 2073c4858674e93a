"""Second-order linear ODEs: n-th image coefficients and the xi expansion.

The normal form is y'' = a(x) y.  Its solutions are

    y1 = -1 + sum_k xi_k(-1)
    y2 = x - x * sum_k xi_k(-1) + sum_k xi_k(-2)

where every xi is built from nested antiderivatives of ``a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Dict, List, Tuple

from .exprkernel import (
    Expr,
    NonElementary,
    UnsupportedCombination,
    KernelError,
    antiderivative,
    const,
    differentiate,
    dn,
    monomial,
    power,
    reciprocal,
    var_x,
)

__all__ = [
    "NonInvertibleWronskian",
    "GeneralODE2",
    "ReducedODE2",
    "Multiplier",
    "reduce_to_normal",
    "adjoint2",
    "nimage_forward",
    "coeffs_from_solutions",
    "g_op",
    "p_op",
    "XiTable",
    "xi_general",
    "xi_bruteforce",
    "xi_closed",
    "Solution2",
    "assemble2",
]


class NonInvertibleWronskian(KernelError):
    pass


@dataclass(frozen=True)
class GeneralODE2:
    """y'' = a1 y' + a2 y."""

    a1: Expr
    a2: Expr


@dataclass(frozen=True)
class ReducedODE2:
    """y'' = a y."""

    a: Expr


@dataclass(frozen=True)
class Multiplier:
    """exp(exponent); the exponent is always a kernel expression."""

    exponent: Expr

    def as_expr(self) -> Expr:
        e = self.exponent
        if e.is_zero():
            return const(1, e.center)
        if e.is_single():
            (sig, k), = e.items()
            if sig[0] == 1 and sig[1:] == (0, 0, "", 0):
                return monomial(1, 0, 0, k, center=e.center)
        raise UnsupportedCombination(f"exp({e}) is outside the kernel")

    def derivative_chain(self, z: Expr, order: int) -> List[Expr]:
        """[y, y', ..., y^(order)] divided by the multiplier, for y = M z."""
        phi1 = differentiate(self.exponent)
        out = [z]
        for _ in range(order):
            prev = out[-1]
            out.append(differentiate(prev) + phi1 * prev)
        return out


def reduce_to_normal(ode: GeneralODE2) -> Tuple[ReducedODE2, Multiplier]:
    """y = exp(phi) z with phi' = a1/2 turns the ODE into z'' = a z."""
    a1, a2 = ode.a1, ode.a2
    a = a2 + (a1 * a1).scale(Fraction(1, 4)) - differentiate(a1).scale(Fraction(1, 2))
    return ReducedODE2(a), Multiplier(antiderivative(a1).scale(Fraction(1, 2)))


def adjoint2(ode: GeneralODE2) -> GeneralODE2:
    return GeneralODE2(-ode.a1, ode.a2 - differentiate(ode.a1))


def nimage_forward(ode: GeneralODE2, n: int) -> Tuple[Expr, Expr]:
    """(alpha(n), beta(n)) with y^(n+2) = alpha(n) y' + beta(n) y."""
    alpha, beta = ode.a1, ode.a2
    for _ in range(n):
        alpha, beta = (differentiate(alpha) + alpha * ode.a1 + beta,
                       alpha * ode.a2 + differentiate(beta))
    return alpha, beta


def coeffs_from_solutions(y1: Expr, y2: Expr, n: int) -> Tuple[Expr, Expr]:
    """(alpha(n), beta(n)) recovered from two independent solutions."""
    w = y1 * differentiate(y2) - y2 * differentiate(y1)
    if w.is_zero():
        raise NonInvertibleWronskian("solutions are linearly dependent")
    try:
        winv = reciprocal(w)
    except UnsupportedCombination as exc:
        raise NonInvertibleWronskian(f"Wronskian {w} is not a single invertible term") from exc
    d1, d2 = differentiate(y1, n + 2), differentiate(y2, n + 2)
    alpha = (d2 * y1 - y2 * d1) * winv
    beta = (d1 * differentiate(y2) - differentiate(y1) * d2) * winv
    return alpha, beta


def g_op(a: Expr, k: int, f: Expr) -> Expr:
    """Apply f -> a * (double antiderivative of f) k times."""
    for _ in range(k):
        f = a * dn(-2, f)
    return f


def p_op(a: Expr, k: int) -> Expr:
    out = a.scale(0)
    for i in range(k):
        out = out + g_op(a, k - i, dn(-1, g_op(a, i, a)))
    return out


class XiTable:
    """Memoized xi_k(-1), xi_k(-2) for one coefficient a."""

    def __init__(self, a: Expr):
        self.a = a
        self._g: List[Expr] = [a]
        self._p: Dict[int, Expr] = {0: a.scale(0)}
        self._neg: List[Tuple[Expr, Expr]] = []

    def g(self, k: int) -> Expr:
        while len(self._g) <= k:
            self._g.append(self.a * dn(-2, self._g[-1]))
        return self._g[k]

    def p(self, k: int) -> Expr:
        if k not in self._p:
            self._p[k] = p_op(self.a, k)
        return self._p[k]

    def xi_neg(self, k: int) -> Tuple[Expr, Expr]:
        """(xi_k(-1), xi_k(-2))."""
        while len(self._neg) <= k:
            self._neg.append(self._next_neg(len(self._neg)))
        return self._neg[k]

    def _next_neg(self, k: int) -> Tuple[Expr, Expr]:
        if k == 0:
            return -dn(-2, self.a), dn(-3, self.a).scale(-2)
        g, p = self.g(k), self.p(k)
        m1 = -dn(-2, g) - dn(-1, p).scale(2)
        m2 = (dn(-3, g) + dn(-2, p)).scale(-2)
        for s in range(k):
            x1, x2 = self._neg[k - s - 1]
            gs, ps = self.g(s), self.p(s)
            m1 = m1 + x1 * (dn(-2, gs) + dn(-1, ps).scale(2)) - x2 * dn(-1, gs)
            m2 = m2 + (x1 * (dn(-3, gs) + dn(-2, ps))).scale(2) - x2 * dn(-2, gs)
        return m1, m2

    def alpha(self, N: int) -> Tuple[Expr, Expr]:
        """(sum_k<=N xi_k(-1), sum_k<=N xi_k(-2))."""
        s1 = s2 = self.a.scale(0)
        for k in range(N + 1):
            x1, x2 = self.xi_neg(k)
            s1, s2 = s1 + x1, s2 + x2
        return s1, s2


def xi_general(table: XiTable, k: int, p: int) -> Expr:
    """xi_k(p) for any integer p from the recursion shared with xi_neg."""
    a = table.a
    if k == 0:
        return dn(p - 1, a).scale(p)
    out = dn(p, dn(-1, table.g(k)).scale(p) - table.p(k).scale(2))
    for s in range(k):
        x1, x2 = table.xi_neg(k - s - 1)
        gs, ps = table.g(s), table.p(s)
        out = out - x2 * dn(p, gs) - x1 * dn(p, dn(-1, gs).scale(p) - ps.scale(2))
    return out


def xi_bruteforce(a: Expr, k: int, p: int, _memo=None) -> Expr:
    """xi_k(p) for p >= 2k from the forward image recursion alone."""
    memo = {} if _memo is None else _memo
    key = (k, p)
    if key in memo:
        return memo[key]
    if p < 2 * k:
        raise ValueError("bruteforce route needs p >= 2k")
    if k == 0:
        out = dn(p - 1, a).scale(p) if p > 0 else a.scale(0)
    else:
        out = a.scale(0)
        for i in range(p - 2 * k + 1):
            prev = xi_bruteforce(a, k - 1, i + 2 * k - 2, memo)
            if not prev.is_zero():
                out = out + (prev * differentiate(a, p - 2 * k - i)).scale(comb(p, i + 2 * k))
    memo[key] = out
    return out


def xi_closed(a: Expr, p: int, which: str) -> Expr:
    """Closed forms near the top of the xi triangle.

    which: "top" xi_p(2p), "top_odd" xi_p(2p+1), "sub1" xi_(p-1)(2p),
    "sub2" xi_(p-2)(2p).
    """
    if which == "top":
        return a.scale(0)
    if which == "top_odd":
        return power(a, p + 1)
    d1 = differentiate(a)
    if which == "sub1":
        if p < 1:
            raise ValueError("sub1 needs p >= 1")
        return (power(a, p - 1) * d1).scale(p * (p + 1))
    if which == "sub2":
        if p < 2:
            raise ValueError("sub2 needs p >= 2")
        d2, d3 = differentiate(a, 2), differentiate(a, 3)
        c = p * p * (p - 1) * (p + 1)
        out = (power(a, p - 2) * d3).scale(Fraction(c, 3))
        if p >= 3:
            out = out + (power(a, p - 3) * d1 * d2).scale(Fraction(2 * c * (p - 2), 3))
        if p >= 4:
            out = out + (power(a, p - 4) * d1 * d1 * d1).scale(Fraction(c * (p - 2) * (p - 3), 6))
        return out
    raise ValueError(f"unknown closed form {which!r}")


@dataclass
class Solution2:
    a: Expr
    N: int
    y1: Expr
    y2: Expr
    table: XiTable = field(repr=False)


def assemble2(a: Expr, N: int, table: XiTable = None) -> Solution2:
    table = table or XiTable(a)
    s1, s2 = table.alpha(N)
    x = var_x(a.center)
    one = const(1, a.center)
    return Solution2(a, N, s1 - one, s2 - x * s1 + x, table)
