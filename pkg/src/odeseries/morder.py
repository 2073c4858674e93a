"""Order-m linear ODEs y^(m) = sum_p a_p y^(m-p).

Work happens on the adjoint coefficients b_1..b_m.  The row xi_{m,s}(-n) is a
sum of nested antiderivative brackets; the block

    F(d, t, n) = sum over i_0..i_d with i_0+...+i_d <= m - t
                 sum over k_0..k_(d-1) in 1..m
                 (-1)^(i_0+...+i_(d-1)) * gbinom(-n, i_d)
                 * prod_l C(k_l - 1 + i_l, k_l - 1)
                 * [ nest(b_(t + i_0+...+i_d)) ]_(n + i_d),

with nest(B) = [...[[B]_(i_0+k_0) b_(k_0)]_(i_1+k_1) b_(k_1)...], does not
depend on s, so it is cached and reused:

    xi_{m,s}(-n) = F(s, 1, n) - sum_{z=1..s} sum_{t=1..m} F(z-1, t, n) xi_{m,s-z}(-t).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Dict, List, Sequence, Tuple

from .exprkernel import Expr, common_center, const, differentiate, dn, gbinom, var_x

__all__ = [
    "ODEm",
    "adjoint_m",
    "nimage_forward_m",
    "XiMatrix",
    "SolutionM",
    "assemble_m",
]


@dataclass(frozen=True)
class ODEm:
    """y^(m) = a_1 y^(m-1) + ... + a_m y; ``a`` holds a_1..a_m."""

    a: Tuple[Expr, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(self.a))
        if not self.a:
            raise ValueError("order must be at least 1")

    @property
    def m(self) -> int:
        return len(self.a)

    @property
    def center(self):
        return common_center(self.a)

    def coeff(self, p: int) -> Expr:
        return self.a[p - 1]


def adjoint_m(ode: ODEm) -> Tuple[Expr, ...]:
    """b_k = sum_{i<=k} (-1)^i C(m-i, m-k) D^(k-i) a_i for k = 1..m."""
    m = ode.m
    out = []
    for k in range(1, m + 1):
        acc = ode.a[0].scale(0)
        for i in range(1, k + 1):
            acc = acc + differentiate(ode.a[i - 1], k - i).scale((-1) ** i * comb(m - i, m - k))
        out.append(acc)
    return tuple(out)


def nimage_forward_m(ode: ODEm, n: int) -> Tuple[Expr, ...]:
    """Coefficients c_1..c_m with y^(m+n) = sum_p c_p y^(m-p)."""
    m = ode.m
    c = list(ode.a)
    for _ in range(n):
        # differentiate y^(m+n) = sum c_p y^(m-p) and fold y^(m) back in
        top = c[0]
        nxt = []
        for p in range(1, m + 1):
            v = differentiate(c[p - 1])
            if p < m:
                v = v + c[p]
            v = v + top * ode.a[p - 1]
            nxt.append(v)
        c = nxt
    return tuple(c)


class XiMatrix:
    """Memoized xi_{m,s}(-n) for fixed adjoint coefficients b_1..b_m."""

    def __init__(self, b: Sequence[Expr]):
        self.b = tuple(b)
        self.m = len(self.b)
        if self.m < 1:
            raise ValueError("need at least one coefficient")
        self._zero = const(0, common_center(self.b))
        self._nonzero = [k for k in range(1, self.m + 1) if not self.b[k - 1].is_zero()]
        self._nest: Dict[tuple, Expr] = {}
        self._ints: Dict[tuple, List[Expr]] = {}
        self._block: Dict[tuple, Expr] = {}
        self._xi: Dict[tuple, Expr] = {}

    @property
    def center(self):
        return self._zero.center

    @classmethod
    def from_ode(cls, ode: ODEm) -> "XiMatrix":
        return cls(adjoint_m(ode))

    def bcoef(self, j: int) -> Expr:
        return self.b[j - 1] if 1 <= j <= self.m else self._zero

    def _nested(self, base: int, pairs: tuple) -> Expr:
        key = (base, pairs)
        got = self._nest.get(key)
        if got is None:
            if not pairs:
                got = self.bcoef(base)
            else:
                inner = self._nested(base, pairs[:-1])
                i, k = pairs[-1]
                got = self._zero if inner.is_zero() else self._integrate(key[:1] + (pairs[:-1],), inner, i + k) * self.bcoef(k)
            self._nest[key] = got
        return got

    def _integrate(self, key: tuple, e: Expr, times: int) -> Expr:
        chain = self._ints.setdefault(key, [e])
        while len(chain) <= times:
            chain.append(dn(-1, chain[-1]))
        return chain[times]

    def block(self, d: int, t: int, n: int) -> Expr:
        key = (d, t, n)
        got = self._block.get(key)
        if got is None:
            got = self._zero
            budget = self.m - t
            for pairs, isum, sign, weight in self._prefixes(d, budget):
                for last in range(budget - isum + 1):
                    nest = self._nested(t + isum + last, pairs)
                    if nest.is_zero():
                        continue
                    c = sign * weight * gbinom(-n, last)
                    if c:
                        got = got + self._integrate((t + isum + last, pairs), nest, n + last).scale(c)
            self._block[key] = got
        return got

    def _prefixes(self, d: int, budget: int):
        """Yield (pairs, sum of i, sign, product of binomials) for depth d."""
        def rec(depth, pairs, isum, weight):
            if depth == d:
                yield tuple(pairs), isum, (-1) ** isum, weight
                return
            for i in range(budget - isum + 1):
                for k in self._nonzero:
                    pairs.append((i, k))
                    yield from rec(depth + 1, pairs, isum + i, weight * comb(k - 1 + i, k - 1))
                    pairs.pop()
        yield from rec(0, [], 0, 1)

    def xi(self, s: int, n: int) -> Expr:
        """xi_{m,s}(-n) for n >= 1."""
        key = (s, n)
        got = self._xi.get(key)
        if got is None:
            got = self.block(s, 1, n)
            for z in range(1, s + 1):
                for t in range(1, self.m + 1):
                    prev = self.xi(s - z, t)
                    if prev.is_zero():
                        continue
                    blk = self.block(z - 1, t, n)
                    if not blk.is_zero():
                        got = got - blk * prev
            self._xi[key] = got
        return got

    def alpha(self, k: int, N: int) -> Expr:
        """sum_{s<=N} xi_{m,s}(-k)."""
        out = self._zero
        for s in range(N + 1):
            out = out + self.xi(s, k)
        return out


@dataclass
class SolutionM:
    m: int
    N: int
    solutions: Tuple[Expr, ...]
    alphas: Tuple[Expr, ...]


def assemble_m(matrix: XiMatrix, N: int) -> SolutionM:
    """Y_1..Y_m built from the alpha(-k) sums truncated at s = N."""
    m = matrix.m
    center = matrix.center
    x = var_x(center)
    one = const(1, center)
    alphas = [matrix.alpha(k, N) for k in range(1, m + 1)]
    xp = [one]
    for _ in range(m):
        xp.append(xp[-1] * x)
    ys = []
    for i in range(1, m + 1):
        y = ((one - alphas[0]) * xp[i - 1]).scale(Fraction((-1) ** i, factorial(i - 1)))
        for k in range(2, i + 1):
            y = y + (alphas[k - 1] * xp[i - k]).scale(Fraction((-1) ** (k + i), factorial(i - k)))
        ys.append(y)
    return SolutionM(m, N, tuple(ys), tuple(alphas))
