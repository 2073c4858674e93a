"""Exact symbolic expressions in one shifted variable.

An expression is a finite sum of terms

    c * u**r * ln(u)**q * exp(k*u) * trig(m*u),        u = x - center,

with rational ``c, r, k, m`` and a non-negative integer ``q``.  A term carries
at most one transcendental factor (log power, exponential or trig), and when
an exponential or trig factor is present ``r`` is a non-negative integer.
That family is closed under addition, multiplication, differentiation and the
canonical antiderivative used here, which never adds an integration constant.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Optional, Union

import mpmath

__all__ = [
    "KernelError",
    "CenterMismatch",
    "UnsupportedCombination",
    "NonElementary",
    "DomainError",
    "ExprSyntaxError",
    "Term",
    "Expr",
    "ZERO",
    "ONE",
    "const",
    "var_x",
    "shift_var",
    "monomial",
    "common_center",
    "add",
    "mul",
    "differentiate",
    "antiderivative",
    "dn",
    "evaluate",
    "gbinom",
    "parse",
    "infer_center",
    "format_expr",
    "to_numpy",
    "WORKING_DPS",
]

Rational = Union[int, Fraction]
WORKING_DPS = 60

# signature: (r, q, k, trig, m); trig is "" | "sin" | "cos"
Sig = tuple
_CONST: Sig = (Fraction(0), 0, Fraction(0), "", Fraction(0))


class KernelError(Exception):
    """Base class for kernel failures."""


class CenterMismatch(KernelError):
    pass


class UnsupportedCombination(KernelError):
    pass


class NonElementary(KernelError):
    pass


class DomainError(KernelError):
    pass


class ExprSyntaxError(KernelError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def _q(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def _is_natural(r: Fraction) -> bool:
    return r.denominator == 1 and r >= 0


def _check_sig(sig: Sig) -> None:
    r, q, k, trig, m = sig
    families = (q > 0) + (k != 0) + (trig != "")
    if families > 1:
        raise UnsupportedCombination(
            "a term may carry only one of ln, exp, sin/cos factors")
    if (k != 0 or trig) and not _is_natural(r):
        raise UnsupportedCombination(
            "exp and trig factors need a non-negative integer power")
    if q < 0:
        raise UnsupportedCombination("negative log power")
    if trig and m <= 0:
        raise UnsupportedCombination("trig frequency must be positive")


@dataclass(frozen=True)
class Term:
    coeff: Fraction
    r: Fraction = Fraction(0)
    q: int = 0
    k: Fraction = Fraction(0)
    trig: str = ""
    m: Fraction = Fraction(0)

    @property
    def sig(self) -> Sig:
        return (self.r, self.q, self.k, self.trig, self.m)


def _display_key(sig: Sig):
    r, q, k, trig, m = sig
    return (k, trig, m, -r, -q)


class Expr:
    """Immutable normalized sum of kernel terms sharing one center."""

    __slots__ = ("center", "_t", "_hash")

    def __init__(self, terms: Optional[Mapping[Sig, Rational]] = None,
                 center: Rational = 0):
        clean = {}
        for sig, c in (terms or {}).items():
            sig = (_q(sig[0]), int(sig[1]), _q(sig[2]), sig[3], _q(sig[4]))
            _check_sig(sig)
            c = _q(c)
            if c:
                clean[sig] = clean.get(sig, Fraction(0)) + c
        self.center = _q(center)
        self._t = {s: c for s, c in clean.items() if c}
        self._hash = None

    @classmethod
    def _raw(cls, t: dict, center: Fraction) -> "Expr":
        e = object.__new__(cls)
        e.center = center
        e._t = t
        e._hash = None
        return e

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> tuple:
        return tuple(Term(self._t[s], *s) for s in sorted(self._t, key=_display_key))

    def items(self):
        return self._t.items()

    def coeff(self, r=0, q=0, k=0, trig="", m=0) -> Fraction:
        return self._t.get((_q(r), q, _q(k), trig, _q(m)), Fraction(0))

    def is_zero(self) -> bool:
        return not self._t

    def is_free(self) -> bool:
        """True when the value does not depend on the center (a constant)."""
        return all(s == _CONST for s in self._t)

    def is_single(self) -> bool:
        return len(self._t) == 1

    def __len__(self):
        return len(self._t)

    def __bool__(self):
        return bool(self._t)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = const(other)
        if not isinstance(other, Expr):
            return NotImplemented
        if self._t != other._t:
            return False
        return self.center == other.center or self.is_free()

    def __hash__(self):
        if self._hash is None:
            cen = Fraction(0) if self.is_free() else self.center
            self._hash = hash((cen, frozenset(self._t.items())))
        return self._hash

    def __repr__(self):
        return f"Expr({format_expr(self)!r}, center={self.center})"

    def __str__(self):
        return format_expr(self)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        return add(self, _lift(other, self.center))

    __radd__ = __add__

    def __neg__(self):
        return Expr._raw({s: -c for s, c in self._t.items()}, self.center)

    def __sub__(self, other):
        return add(self, -_lift(other, self.center))

    def __rsub__(self, other):
        return add(_lift(other, self.center), -self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / _q(other))
        return mul(self, reciprocal(other))

    def __pow__(self, p):
        return power(self, p)

    def scale(self, c: Rational) -> "Expr":
        c = _q(c)
        if not c:
            return Expr._raw({}, self.center)
        return Expr._raw({s: v * c for s, v in self._t.items()}, self.center)

    def diff(self, times: int = 1) -> "Expr":
        return differentiate(self, times)

    def integrate(self, times: int = 1) -> "Expr":
        return dn(-times, self)


def _lift(v, center) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, Fraction)):
        return const(v, center)
    raise TypeError(f"cannot combine Expr with {type(v).__name__}")


def const(c: Rational, center: Rational = 0) -> Expr:
    c = _q(c)
    return Expr._raw({_CONST: c} if c else {}, _q(center))


ZERO = const(0)
ONE = const(1)


def monomial(coeff: Rational = 1, r: Rational = 0, q: int = 0, k: Rational = 0,
             trig: str = "", m: Rational = 0, center: Rational = 0) -> Expr:
    return Expr({(r, q, k, trig, m): coeff}, center)


def shift_var(center: Rational = 0) -> Expr:
    """The shifted variable u = x - center."""
    return monomial(1, 1, center=center)


def var_x(center: Rational = 0) -> Expr:
    """The independent variable x written in the given center."""
    return shift_var(center) + const(center, center)


def _join_center(e1: Expr, e2: Expr) -> Fraction:
    if e1.center == e2.center or e2.is_free():
        return e1.center
    if e1.is_free():
        return e2.center
    raise CenterMismatch(f"centers {e1.center} and {e2.center} differ")


def common_center(exprs: Iterable[Expr]) -> Fraction:
    """The shared center of the non-constant expressions (0 if none)."""
    found = None
    for e in exprs:
        if e.is_free():
            continue
        if found is None:
            found = e.center
        elif e.center != found:
            raise CenterMismatch(f"centers {found} and {e.center} differ")
    return Fraction(0) if found is None else found


def add(e1: Expr, e2: Expr) -> Expr:
    center = _join_center(e1, e2)
    t = dict(e1._t)
    for s, c in e2._t.items():
        v = t.get(s, 0) + c
        if v:
            t[s] = v
        else:
            t.pop(s, None)
    return Expr._raw(t, center)


def _trig_sig(r, kind, freq) -> list:
    """Normalize kind(freq*u) into (sig, factor) pairs."""
    if freq == 0:
        return [((r, 0, Fraction(0), "", Fraction(0)), Fraction(1))] if kind == "cos" else []
    if freq < 0:
        sign = Fraction(-1) if kind == "sin" else Fraction(1)
        return [((r, 0, Fraction(0), kind, -freq), sign)]
    return [((r, 0, Fraction(0), kind, freq), Fraction(1))]


@lru_cache(maxsize=None)
def _mul_sig(s1: Sig, s2: Sig) -> tuple:
    r = s1[0] + s2[0]
    q = s1[1] + s2[1]
    k = s1[2] + s2[2]
    if s1[3] and s2[3]:
        a, b = s1[4], s2[4]
        half = Fraction(1, 2)
        if s1[3] == "sin" and s2[3] == "sin":
            parts = [("cos", a - b, half), ("cos", a + b, -half)]
        elif s1[3] == "cos" and s2[3] == "cos":
            parts = [("cos", a - b, half), ("cos", a + b, half)]
        elif s1[3] == "sin":
            parts = [("sin", a + b, half), ("sin", a - b, half)]
        else:
            parts = [("sin", a + b, half), ("sin", a - b, -half)]
        out = []
        for kind, f, w in parts:
            for sig, sgn in _trig_sig(r, kind, f):
                sig = (sig[0], q, k, sig[3], sig[4])
                _check_sig(sig)
                out.append((sig, w * sgn))
        return tuple(out)
    trig, m = (s1[3], s1[4]) if s1[3] else (s2[3], s2[4])
    sig = (r, q, k, trig, m)
    _check_sig(sig)
    return ((sig, Fraction(1)),)


def mul(e1: Expr, e2: Expr) -> Expr:
    center = _join_center(e1, e2)
    t: dict = {}
    for s1, c1 in e1._t.items():
        for s2, c2 in e2._t.items():
            c = c1 * c2
            for sig, w in _mul_sig(s1, s2):
                v = t.get(sig, 0) + c * w
                if v:
                    t[sig] = v
                else:
                    t.pop(sig, None)
    return Expr._raw(t, center)


def _exact_root(c: Fraction, p: Fraction) -> Optional[Fraction]:
    """c**p when it is rational, else None."""
    if p.denominator == 1:
        return c ** int(p)
    if c < 0:
        return None
    num, den = c.numerator, c.denominator
    n = p.denominator

    def iroot(v):
        r = round(v ** (1.0 / n)) if v < 2 ** 1000 else _int_root(v, n)
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand ** n == v:
                return cand
        return None

    rn, rd = iroot(num), iroot(den)
    if rn is None or rd is None:
        return None
    return Fraction(rn, rd) ** p.numerator


def _int_root(v: int, n: int) -> int:
    lo, hi = 0, 1 << (v.bit_length() // n + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid ** n <= v:
            lo = mid
        else:
            hi = mid - 1
    return lo


def reciprocal(e: Expr) -> Expr:
    """1/e for a single term without log or trig factors."""
    if not e.is_single():
        raise UnsupportedCombination("only single terms can be inverted")
    (sig, c), = e._t.items()
    r, q, k, trig, m = sig
    if q or trig:
        raise UnsupportedCombination("cannot invert a log or trig factor")
    if k and r:
        raise UnsupportedCombination("cannot invert a power times exponential")
    return Expr({(-r, 0, -k, "", Fraction(0)): 1 / c}, e.center)


def power(e: Expr, p: Rational) -> Expr:
    p = _q(p)
    if _is_natural(p):
        out, base, n = const(1, e.center), e, int(p)
        while n:
            if n & 1:
                out = mul(out, base)
            n >>= 1
            if n:
                base = mul(base, base)
        return out
    if p.denominator == 1:
        return power(reciprocal(e), -p)
    if not e.is_single():
        raise UnsupportedCombination("fractional power of a sum")
    (sig, c), = e._t.items()
    r, q, k, trig, m = sig
    if q or trig:
        raise UnsupportedCombination("fractional power of a log or trig factor")
    root = _exact_root(c, p)
    if root is None:
        raise UnsupportedCombination(f"coefficient {c} has no rational power {p}")
    return Expr({(r * p, 0, k * p, "", Fraction(0)): root}, e.center)


# -- calculus -------------------------------------------------------------

@lru_cache(maxsize=None)
def _diff_sig(sig: Sig) -> tuple:
    r, q, k, trig, m = sig
    out = []
    if r:
        out.append(((r - 1, q, k, trig, m), r))
    if q:
        out.append(((r - 1, q - 1, k, trig, m), Fraction(q)))
    if k:
        out.append(((r, q, k, trig, m), k))
    if trig == "sin":
        out.append(((r, q, k, "cos", m), m))
    elif trig == "cos":
        out.append(((r, q, k, "sin", m), -m))
    return tuple(out)


def _apply(e: Expr, rule) -> Expr:
    t: dict = {}
    for s, c in e._t.items():
        for sig, w in rule(s):
            v = t.get(sig, 0) + c * w
            if v:
                t[sig] = v
            else:
                t.pop(sig, None)
    return Expr._raw(t, e.center)


def differentiate(e: Expr, times: int = 1) -> Expr:
    for _ in range(times):
        if not e._t:
            break
        e = _apply(e, _diff_sig)
    return e


@lru_cache(maxsize=None)
def _int_sig(sig: Sig) -> tuple:
    r, q, k, trig, m = sig
    zero = Fraction(0)
    if k == 0 and not trig:
        if r == -1:
            return (((zero, q + 1, zero, "", zero), Fraction(1, q + 1)),)
        out, f = [], Fraction(1)
        for j in range(q + 1):
            out.append(((r + 1, q - j, zero, "", zero), f / (r + 1)))
            f = -f * (q - j) / (r + 1)
        return tuple(out)
    if not _is_natural(r):
        raise NonElementary(f"no closed antiderivative for signature {sig}")
    n = int(r)
    if k:
        out, f = [], Fraction(1) / k
        for j in range(n + 1):
            out.append(((Fraction(n - j), 0, k, "", zero), f))
            f = -f * (n - j) / k
        return tuple(out)
    acc: dict = {}
    kind, scale, deg = trig, Fraction(1), n
    while deg >= 0:
        # int u^deg sin = -u^deg cos/m + deg/m int u^(deg-1) cos
        # int u^deg cos =  u^deg sin/m - deg/m int u^(deg-1) sin
        if kind == "sin":
            acc[(Fraction(deg), 0, zero, "cos", m)] = -scale / m
            scale, kind = scale * deg / m, "cos"
        else:
            acc[(Fraction(deg), 0, zero, "sin", m)] = scale / m
            scale, kind = -scale * deg / m, "sin"
        deg -= 1
    return tuple((s, c) for s, c in acc.items() if c)


def antiderivative(e: Expr) -> Expr:
    return _apply(e, _int_sig)


def dn(n: int, e: Expr) -> Expr:
    """Differentiate n times for n >= 0, else take |n| antiderivatives."""
    if n >= 0:
        return differentiate(e, n)
    for _ in range(-n):
        if not e._t:
            break
        e = _apply(e, _int_sig)
    return e


def gbinom(q: Rational, i: int) -> Fraction:
    """Generalized binomial coefficient q(q-1)...(q-i+1)/i!."""
    if i < 0:
        return Fraction(0)
    q = _q(q)
    out = Fraction(1)
    for j in range(i):
        out = out * (q - j) / (j + 1)
    return out


# -- evaluation -----------------------------------------------------------

def _term_exact(sig: Sig, u: Fraction) -> Optional[Fraction]:
    r, q, k, trig, m = sig
    if k and u != 0:
        return None
    if trig:
        if u != 0:
            return None
        if trig == "sin":
            return Fraction(0)
    if q and u != 1:
        return None
    if q:
        return Fraction(0)
    if r == 0:
        return Fraction(1)
    if u == 0:
        return Fraction(0)
    return _exact_root(u, r)


def _check_domain(sig: Sig, u) -> None:
    r, q = sig[0], sig[1]
    if (q or r.denominator != 1) and u <= 0:
        raise DomainError("log or fractional power at or left of the center")
    if r < 0 and u == 0:
        raise DomainError("negative power at the center")


def evaluate(e: Expr, x0, dps: int = WORKING_DPS):
    """Value at x0: a Fraction when exact, else an mpmath float."""
    exact_in = isinstance(x0, (int, Fraction))
    if isinstance(x0, str):
        x0, exact_in = Fraction(x0), True
    if exact_in:
        u = _q(x0) - e.center
        for sig in e._t:
            _check_domain(sig, u)
        vals = [_term_exact(sig, u) for sig in e._t]
        if all(v is not None for v in vals):
            return sum((c * v for c, v in zip(e._t.values(), vals)), Fraction(0))
    with mpmath.workdps(max(dps, 15)):
        if exact_in:
            u = mpmath.mpf(_q(x0).numerator) / _q(x0).denominator - _mpq(e.center)
            uq = _q(x0) - e.center
        else:
            u = mpmath.mpf(x0) - _mpq(e.center)
            uq = u
        total = mpmath.mpf(0)
        lnu = None
        for sig, c in e._t.items():
            _check_domain(sig, uq)
            r, q, k, trig, m = sig
            v = _mpq(c)
            if r:
                v *= mpmath.power(u, _mpq(r)) if r.denominator != 1 else u ** int(r)
            if q:
                if lnu is None:
                    lnu = mpmath.log(u)
                v *= lnu ** q
            if k:
                v *= mpmath.exp(_mpq(k) * u)
            if trig == "sin":
                v *= mpmath.sin(_mpq(m) * u)
            elif trig == "cos":
                v *= mpmath.cos(_mpq(m) * u)
            total += v
        return +total


def _mpq(f: Fraction):
    return mpmath.mpf(f.numerator) / f.denominator


def to_numpy(e: Expr):
    """Vectorized float64 evaluator (for quadrature, not for verification)."""
    import numpy as np

    terms = [(float(c), s) for s, c in e._t.items()]
    c0 = float(e.center)

    def f(x):
        u = np.asarray(x, dtype=float) - c0
        out = np.zeros_like(u)
        for c, (r, q, k, trig, m) in terms:
            v = np.full_like(u, c)
            if r:
                v = v * u ** float(r)
            if q:
                v = v * np.log(u) ** q
            if k:
                v = v * np.exp(float(k) * u)
            if trig == "sin":
                v = v * np.sin(float(m) * u)
            elif trig == "cos":
                v = v * np.cos(float(m) * u)
            out = out + v
        return out

    return f


# -- text syntax ----------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_]+)|(\*\*|[-+*/^()])|(\S))")


def _tokenize(text: str):
    toks, pos = [], 0
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if mt is None:
            break
        if mt.group(4) is not None:
            raise ExprSyntaxError(f"unexpected character {mt.group(4)!r}", mt.start(4))
        if mt.group(1) is not None:
            toks.append(("num", int(mt.group(1)), mt.start(1)))
        elif mt.group(2) is not None:
            toks.append(("name", mt.group(2), mt.start(2)))
        elif mt.group(3) is not None:
            op = "^" if mt.group(3) == "**" else mt.group(3)
            toks.append(("op", op, mt.start(3)))
        pos = mt.end()
    toks.append(("end", None, len(text)))
    return toks


_FUNCS = ("ln", "log", "exp", "sin", "cos", "sqrt")


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, op):
        t = self.take()
        if t[0] != "op" or t[1] != op:
            raise ExprSyntaxError(f"expected {op!r}", t[2])
        return t

    def parse(self):
        node = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ExprSyntaxError("unexpected trailing input", t[2])
        return node

    def expr(self):
        t = self.peek()
        if t[0] == "op" and t[1] in "+-":
            self.take()
            node = self.term()
            if t[1] == "-":
                node = ("neg", t[2], node)
        else:
            node = self.term()
        while True:
            t = self.peek()
            if t[0] == "op" and t[1] in "+-":
                self.take()
                node = ("add" if t[1] == "+" else "sub", t[2], node, self.term())
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            t = self.peek()
            if t[0] == "op" and t[1] in "*/":
                self.take()
                node = ("mul" if t[1] == "*" else "div", t[2], node, self.unary())
            else:
                return node

    def unary(self):
        t = self.peek()
        if t[0] == "op" and t[1] in "+-":
            self.take()
            node = self.unary()
            return ("neg", t[2], node) if t[1] == "-" else node
        return self.power()

    def power(self):
        base = self.atom()
        t = self.peek()
        if t[0] == "op" and t[1] == "^":
            self.take()
            return ("pow", t[2], base, self.exponent())
        return base

    def exponent(self):
        t = self.peek()
        if t[0] == "op" and t[1] == "-":
            self.take()
            return ("neg", t[2], self.exponent())
        if t[0] == "op" and t[1] == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        if t[0] == "num":
            self.take()
            return ("num", t[2], Fraction(t[1]))
        if t[0] == "name" and t[1] == "x":
            self.take()
            return ("x", t[2])
        raise ExprSyntaxError("bad exponent", t[2])

    def atom(self):
        t = self.take()
        kind, val, pos = t
        if kind == "num":
            return ("num", pos, Fraction(val))
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return ("paren", pos, node)
        if kind == "name":
            if val == "x":
                return ("x", pos)
            if val == "e":
                t2 = self.peek()
                if t2[0] == "op" and t2[1] == "^":
                    self.take()
                    return ("exp", pos, self.exponent())
                raise ExprSyntaxError("'e' must be followed by '^'", t2[2])
            if val in _FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                name = "ln" if val == "log" else val
                return (name, pos, arg)
            raise ExprSyntaxError(f"unknown name {val!r}", pos)
        if kind == "end":
            raise ExprSyntaxError("unexpected end of input", pos)
        raise ExprSyntaxError(f"unexpected {val!r}", pos)


def _poly0(node) -> Optional[dict]:
    """Evaluate a subtree as a polynomial in x (center 0), or None."""
    kind = node[0]
    if kind == "num":
        return {0: node[2]}
    if kind == "x":
        return {1: Fraction(1)}
    if kind == "paren":
        return _poly0(node[2])
    if kind == "neg":
        p = _poly0(node[2])
        return None if p is None else {d: -c for d, c in p.items()}
    if kind in ("add", "sub"):
        a, b = _poly0(node[2]), _poly0(node[3])
        if a is None or b is None:
            return None
        out = dict(a)
        sgn = 1 if kind == "add" else -1
        for d, c in b.items():
            out[d] = out.get(d, 0) + sgn * c
        return {d: c for d, c in out.items() if c}
    if kind == "mul":
        a, b = _poly0(node[2]), _poly0(node[3])
        if a is None or b is None:
            return None
        out: dict = {}
        for d1, c1 in a.items():
            for d2, c2 in b.items():
                out[d1 + d2] = out.get(d1 + d2, 0) + c1 * c2
        return {d: c for d, c in out.items() if c}
    if kind == "div":
        a, b = _poly0(node[2]), _poly0(node[3])
        if a is None or b is None or set(b) - {0} or not b:
            return None
        return {d: c / b[0] for d, c in a.items()}
    return None


def _root_of_linear(node) -> Optional[Fraction]:
    p = _poly0(node)
    if p is None or not p or set(p) - {0, 1} or 1 not in p:
        return None
    return -p.get(0, Fraction(0)) / p[1]


def _collect_anchors(node, strong: set, weak: set) -> None:
    kind = node[0]
    if kind in ("ln", "sqrt", "exp", "sin", "cos"):
        c = _root_of_linear(node[2])
        if c is not None:
            if kind in ("ln", "sqrt") or c != 0:
                strong.add(c)
            else:
                weak.add(c)
            return
    elif kind == "pow":
        base, ex = node[2], node[3]
        p = _poly0(ex)
        base_in = base[2] if base[0] == "paren" else base
        c = _root_of_linear(base_in)
        if c is not None:
            natural = p is not None and set(p) <= {0} and _is_natural(p.get(0, Fraction(0)))
            (weak if natural else strong).add(c)
            return
    elif kind == "div":
        den = node[3]
        den_in = den[2] if den[0] == "paren" else den
        if den_in[0] == "pow":
            inner = den_in[2][2] if den_in[2][0] == "paren" else den_in[2]
            c = _root_of_linear(inner)
        else:
            c = _root_of_linear(den_in) if _poly0(den_in) and set(_poly0(den_in)) != {0} else None
        if c is not None:
            strong.add(c)
    elif kind == "paren":
        c = _root_of_linear(node[2])
        if c is not None and c != 0:
            weak.add(c)
            return
    elif kind == "x":
        weak.add(Fraction(0))
    for child in node[2:]:
        if isinstance(child, tuple):
            _collect_anchors(child, strong, weak)


def _anchors(text: str):
    strong, weak = set(), set()
    _collect_anchors(_Parser(text).parse(), strong, weak)
    return strong, weak


def infer_center(texts: Iterable[str]) -> Fraction:
    """Pick the expansion center implied by shifted logs, roots and powers."""
    strong, weak = set(), set()
    for t in texts:
        s, w = _anchors(t)
        strong |= s
        weak |= w
    if len(strong) > 1:
        raise CenterMismatch(f"inputs imply several centers: {sorted(strong)}")
    if strong:
        return strong.pop()
    if len(weak) == 1:
        return weak.pop()
    return Fraction(0)


def _linear_arg(e: Expr, what: str) -> Fraction:
    """Return k when e == k*u exactly."""
    if e.is_zero():
        return Fraction(0)
    if e.is_single():
        (sig, c), = e.items()
        if sig == (Fraction(1), 0, Fraction(0), "", Fraction(0)):
            return c
    raise UnsupportedCombination(
        f"{what} argument must be a multiple of the shifted variable")


def _build(node, center: Fraction) -> Expr:
    kind = node[0]
    if kind == "num":
        return const(node[2], center)
    if kind == "x":
        return var_x(center)
    if kind == "paren":
        return _build(node[2], center)
    if kind == "neg":
        return -_build(node[2], center)
    if kind in ("add", "sub", "mul"):
        a, b = _build(node[2], center), _build(node[3], center)
        return a + b if kind == "add" else a - b if kind == "sub" else mul(a, b)
    if kind == "div":
        a, b = _build(node[2], center), _build(node[3], center)
        if b.is_zero():
            raise ExprSyntaxError("division by zero", node[1])
        if b.is_free():
            return a.scale(1 / b.coeff())
        return mul(a, reciprocal(b))
    if kind == "pow":
        ex = _build(node[3], center)
        if not ex.is_free():
            raise ExprSyntaxError("exponent must be a rational constant", node[1])
        return power(_build(node[2], center), ex.coeff())
    if kind == "sqrt":
        return power(_build(node[2], center), Fraction(1, 2))
    if kind == "ln":
        arg = _build(node[2], center)
        if arg != shift_var(center):
            raise UnsupportedCombination(
                f"ln argument must be x - ({center}) for this center")
        return monomial(1, 0, 1, center=center)
    if kind == "exp":
        k = _linear_arg(_build(node[2], center), "exp")
        return monomial(1, 0, 0, k, center=center)
    if kind in ("sin", "cos"):
        f = _linear_arg(_build(node[2], center), kind)
        out: dict = {}
        for sig, w in _trig_sig(Fraction(0), kind, f):
            out[sig] = w
        return Expr(out, center)
    raise ExprSyntaxError(f"unsupported construct {kind}", node[1])


def parse(text: str, center: Optional[Rational] = None) -> Expr:
    """Parse the expression grammar; the center is inferred when not given."""
    tree = _Parser(text).parse()
    if center is None:
        center = infer_center([text])
    return _build(tree, _q(center))


# -- formatting -----------------------------------------------------------

def _fmt_q(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _shift_text(center: Fraction) -> str:
    if center == 0:
        return "x"
    sign = "-" if center > 0 else "+"
    return f"(x{sign}{_fmt_q(abs(center))})"


def _scaled_u(k: Fraction, u: str) -> str:
    a, b = abs(k.numerator), k.denominator
    s = u if a == 1 else f"{a}*{u}"
    if b != 1:
        s = f"{s}/{b}"
    return ("-" if k < 0 else "") + s


def _term_body(sig: Sig, center: Fraction) -> list:
    r, q, k, trig, m = sig
    u = _shift_text(center)
    parts = []
    if r:
        if r == 1:
            parts.append(u)
        elif r.denominator == 1 and r > 0:
            parts.append(f"{u}^{r.numerator}")
        else:
            parts.append(f"{u}^({_fmt_q(r)})")
    if q:
        inner = u[1:-1] if center else u
        parts.append(f"ln({inner})" + (f"^{q}" if q > 1 else ""))
    if k:
        parts.append(f"exp({_scaled_u(k, u)})")
    if trig:
        parts.append(f"{trig}({_scaled_u(m, u)})")
    return parts


def _tex_q(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _tex_body(sig: Sig, center: Fraction) -> list:
    r, q, k, trig, m = sig
    u = "x" if center == 0 else _shift_text(center).replace("(", "\\left(").replace(")", "\\right)")
    parts = []
    if r:
        parts.append(u if r == 1 else f"{u}^{{{_tex_q(r)}}}")
    if q:
        inner = "x" if center == 0 else _shift_text(center)[1:-1]
        parts.append(f"\\ln\\left({inner}\\right)" + (f"^{{{q}}}" if q > 1 else ""))
    if k:
        kk = "" if k == 1 else "-" if k == -1 else _tex_q(k) + " "
        parts.append(f"e^{{{kk}{u}}}")
    if trig:
        mm = "" if m == 1 else _tex_q(m) + " "
        parts.append(f"\\{trig}\\left({mm}{u}\\right)")
    return parts


def format_expr(e: Expr, style: str = "text") -> str:
    """Render in the parse grammar (style='text') or as LaTeX."""
    if e.is_zero():
        return "0"
    pieces = []
    for idx, (sig, c) in enumerate(sorted(e.items(), key=lambda it: _display_key(it[0]))):
        neg = c < 0
        a = abs(c)
        num, den = a.numerator, a.denominator
        if style == "latex":
            body = " ".join(_tex_body(sig, e.center))
            top = body if num == 1 and body else f"{num} {body}".strip()
            s = top if den == 1 else f"\\frac{{{top}}}{{{den}}}"
        else:
            body = "*".join(_term_body(sig, e.center))
            if not body:
                s = _fmt_q(a)
            else:
                s = body if num == 1 else f"{num}*{body}"
                if den != 1:
                    s = f"{s}/{den}"
        if idx == 0:
            pieces.append(("-" if neg else "") + s)
        else:
            pieces.append((" - " if neg else " + ") + s)
    return "".join(pieces)
