"""Weighted Leibniz sums and their closed forms."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Sequence

from .exprkernel import Expr, differentiate, dn, gbinom

__all__ = [
    "WeightSpec",
    "leibniz_sum",
    "stirling2",
    "power_closed",
    "vieta_coeffs",
    "binom_closed",
    "nested_identity",
]


@dataclass(frozen=True)
class WeightSpec:
    """Weight f(i) in sum_i f(i) C(n,i) D^i u D^(n-i) v.

    kind is "one" (f = 1), "power" (f = i**k) or "binom" (f = C(i - z, k)).
    """

    kind: str = "one"
    k: int = 0
    z: Fraction = Fraction(0)

    def __post_init__(self):
        if self.kind not in ("one", "power", "binom"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.k < 0:
            raise ValueError("weight exponent must be non-negative")

    def __call__(self, i: int) -> Fraction:
        if self.kind == "one":
            return Fraction(1)
        if self.kind == "power":
            return Fraction(i) ** self.k  # 0**0 == 1
        return gbinom(Fraction(i) - Fraction(self.z), self.k)


def leibniz_sum(w: WeightSpec, u: Expr, v: Expr, n: int) -> Expr:
    total = u.scale(0)
    du = u
    for i in range(n + 1):
        f = w(i)
        if f:
            total = total + (du * differentiate(v, n - i)).scale(f * comb(n, i))
        du = differentiate(du, 1)
    return total


@lru_cache(maxsize=None)
def stirling2(k: int, i: int) -> int:
    if k == i:
        return 1
    if i == 0 or i > k:
        return 0
    return i * stirling2(k - 1, i) + stirling2(k - 1, i - 1)


def power_closed(k: int, u: Expr, v: Expr, n: int) -> Expr:
    """sum_i i**k C(n,i) D^i u D^(n-i) v without the i-loop over derivatives of v."""
    total = u.scale(0)
    for i in range(min(k, n) + 1):
        s = stirling2(k, i)
        if s:
            falling = factorial(n) // factorial(n - i)
            total = total + dn(n - i, differentiate(u, i) * v).scale(s * falling)
    return total


def vieta_coeffs(k: int) -> list:
    """Coefficients r_1..r_(k+1) with i(i-1)...(i-k+1) = sum_s r_s i**(k+1-s)."""
    poly = [Fraction(1)]  # ascending powers
    for j in range(k):
        nxt = [Fraction(0)] * (len(poly) + 1)
        for d, c in enumerate(poly):
            nxt[d + 1] += c
            nxt[d] -= j * c
        poly = nxt
    return [poly[k + 1 - s] for s in range(1, k + 2)]


def binom_closed(k: int, z, u: Expr, v: Expr, n: int) -> Expr:
    """sum_i C(i - z, k) C(n,i) D^i u D^(n-i) v through power sums."""
    z = Fraction(z)
    r = vieta_coeffs(k)
    coef = [Fraction(0)] * (k + 1)  # coefficient of i**j
    for s, rs in enumerate(r, start=1):
        p = k + 1 - s
        for j in range(p + 1):
            coef[j] += rs * comb(p, j) * (-z) ** (p - j)
    total = u.scale(0)
    for j, c in enumerate(coef):
        if c:
            total = total + power_closed(j, u, v, n).scale(c / factorial(k))
    return total


def nested_identity(b: Sequence[Expr], k0: int, n: int, m: int):
    """Both sides of the nested-integral Leibniz identity; returns (lhs, rhs).

    b must be indexable at 0..m-1 and at k0.  The binomial weight uses z = k0.
    """
    if k0 < 1:
        raise ValueError("k0 must be positive")
    v = b[k0]
    lhs = v.scale(0)
    for i0 in range(m):
        u = dn(-(i0 + k0), b[i0])
        lhs = lhs + leibniz_sum(WeightSpec("binom", i0, Fraction(k0)), u, v, n)
    rhs = v.scale(0)
    for i1 in range(min(m - 1, n) + 1):
        for i0 in range(m - i1):
            w = (-1) ** i0 * comb(k0 - 1 + i0, k0 - 1) * comb(n, i1)
            rhs = rhs + dn(n - i1, dn(-(i0 + k0), b[i1 + i0]) * v).scale(w)
    return lhs, rhs
