"""Particular solutions of y^(m) + b_1 y^(m-1) + ... + b_m y = F.

Given m-1 independent homogeneous solutions, the operator factors through the
Wronskian chain W_0 = 1, W_k = W(y_1..y_k), W_m = exp(-int b_1):

    Y = W_1 int (W_2 W_0 / W_1^2) int ... int (W_m W_(m-2) / W_(m-1)^2) int F W_(m-1) / W_m

with zero integration constants.  When every W_k is a single invertible term
the chain is evaluated exactly; otherwise it is integrated numerically on a
grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_simpson

from .exprkernel import (
    Expr,
    KernelError,
    UnsupportedCombination,
    antiderivative,
    const,
    differentiate,
    dn,
    monomial,
    reciprocal,
    to_numpy,
)

__all__ = [
    "NotAHomogeneousSolution",
    "SingularHomogeneousSolution",
    "NonFiniteValue",
    "NonHomProblem",
    "ParticularResult",
    "wronskian",
    "wronskian_chain",
    "particular",
    "particular2",
    "nested_quadrature",
]


class NotAHomogeneousSolution(KernelError):
    pass


class SingularHomogeneousSolution(KernelError):
    pass


class NonFiniteValue(KernelError):
    pass


def apply_lhs(b: Sequence[Expr], y: Expr) -> Expr:
    """y^(m) + sum_p b_p y^(m-p)."""
    m = len(b)
    derivs = [y]
    for _ in range(m):
        derivs.append(differentiate(derivs[-1]))
    out = derivs[m]
    for p in range(1, m + 1):
        out = out + b[p - 1] * derivs[m - p]
    return out


@dataclass
class NonHomProblem:
    """``b`` holds b_1..b_m; ``homog`` holds m-1 homogeneous solutions.

    With ``strict`` the solutions must satisfy the homogeneous equation
    exactly; otherwise their residuals are only recorded.
    """

    b: Tuple[Expr, ...]
    rhs: Expr
    homog: Tuple[Expr, ...]
    strict: bool = True
    homog_residuals: Tuple[Expr, ...] = field(init=False)

    def __post_init__(self):
        self.b = tuple(self.b)
        self.homog = tuple(self.homog)
        if len(self.homog) != self.m - 1:
            raise ValueError(f"order {self.m} needs {self.m - 1} homogeneous solutions")
        self.homog_residuals = tuple(apply_lhs(self.b, y) for y in self.homog)
        if self.strict:
            for i, r in enumerate(self.homog_residuals, 1):
                if not r.is_zero():
                    raise NotAHomogeneousSolution(f"solution {i} leaves residual {r}")

    @property
    def m(self) -> int:
        return len(self.b)


def wronskian(ys: Sequence[Expr]) -> Expr:
    """Determinant of the derivative matrix, by cofactor expansion."""
    n = len(ys)
    rows = [[differentiate(y, r) for y in ys] for r in range(n)]

    def det(cols: Tuple[int, ...], row: int) -> Expr:
        if len(cols) == 1:
            return rows[row][cols[0]]
        out = None
        for j, c in enumerate(cols):
            minor = det(cols[:j] + cols[j + 1:], row + 1)
            term = rows[row][c] * minor
            term = term if j % 2 == 0 else -term
            out = term if out is None else out + term
        return out

    return det(tuple(range(n)), 0)


def _exp_of_integral(b1: Expr, sign: int) -> Expr:
    """exp(sign * int b1) when the integral is linear, else raise."""
    phi = antiderivative(b1).scale(sign)
    if phi.is_zero():
        return const(1, b1.center)
    if phi.is_single():
        (sig, k), = phi.items()
        if sig == (1, 0, 0, "", 0):
            return monomial(1, 0, 0, k, center=b1.center)
    raise UnsupportedCombination(f"exp({phi}) is outside the kernel")


def wronskian_chain(p: NonHomProblem) -> List[Expr]:
    """[W_0, ..., W_m]; solutions are taken outermost-last."""
    ys = list(reversed(p.homog))
    center = p.b[0].center if p.b else 0
    ws = [const(1, center)]
    for k in range(1, p.m):
        ws.append(wronskian(ys[:k]))
    ws.append(_exp_of_integral(p.b[0], -1))
    return ws


@dataclass
class ParticularResult:
    method: str  # "symbolic" | "numeric"
    expr: Optional[Expr] = None
    grid: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    reason: str = ""


def _symbolic(p: NonHomProblem) -> Expr:
    ws = wronskian_chain(p)
    m = p.m
    inv = [reciprocal(w) for w in ws]
    acc = p.rhs * ws[m - 1] * inv[m]
    for k in range(m - 1, 0, -1):
        acc = antiderivative(acc)
        acc = acc * ws[k + 1] * ws[k - 1] * inv[k] * inv[k]
    return ws[1] * antiderivative(acc)


def nested_quadrature(plan: Sequence[Tuple[Callable, bool]], grid: np.ndarray,
                      refine: bool = True) -> np.ndarray:
    """Run a multiply/integrate plan on a uniform grid starting from 1.

    Each step multiplies the running values by f(grid) and, when flagged,
    replaces them by the cumulative integral from grid[0].  With ``refine``
    the plan is rerun on the halved grid and combined by one Richardson step.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 5:
        raise ValueError("grid needs at least five points")
    h = np.diff(grid)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0) or h[0] <= 0:
        raise ValueError("grid must be uniform and increasing")

    def run(xs):
        vals = np.ones_like(xs)
        with np.errstate(all="ignore"):
            for f, integrate in plan:
                vals = vals * f(xs)
                if not np.all(np.isfinite(vals)):
                    raise NonFiniteValue("integrand is not finite on the grid")
                if integrate:
                    vals = cumulative_simpson(vals, x=xs, initial=0.0)
        return vals

    coarse = run(grid)
    if not refine:
        return coarse
    fine_grid = np.linspace(grid[0], grid[-1], 2 * len(grid) - 1)
    fine = run(fine_grid)[::2]
    return (16.0 * fine - coarse) / 15.0


def _numeric_plan(p: NonHomProblem, grid: np.ndarray):
    ys = list(reversed(p.homog))
    m = p.m
    ws_np: List[Callable] = [lambda x: np.ones_like(x)]
    for k in range(1, m):
        ws_np.append(to_numpy(wronskian(ys[:k])))
    b1 = p.b[0]
    try:
        ws_np.append(to_numpy(_exp_of_integral(b1, -1)))
    except UnsupportedCombination:
        phi = to_numpy(antiderivative(b1))
        ws_np.append(lambda x, phi=phi: np.exp(-phi(x)))
    for k in range(1, m + 1):
        if np.any(ws_np[k](np.asarray(grid, dtype=float)) == 0):
            raise SingularHomogeneousSolution(f"W_{k} vanishes on the grid")
    F = to_numpy(p.rhs)
    plan = [(lambda x: F(x) * ws_np[m - 1](x) / ws_np[m](x), True)]
    for k in range(m - 1, 0, -1):
        plan.append((lambda x, k=k: ws_np[k + 1](x) * ws_np[k - 1](x) / ws_np[k](x) ** 2, True))
    plan.append((ws_np[1], False))
    return plan


def particular(p: NonHomProblem, grid: Optional[Sequence[float]] = None) -> ParticularResult:
    """Symbolic particular solution when possible, else nested quadrature on ``grid``."""
    reason = ""
    if p.strict:
        try:
            return ParticularResult("symbolic", expr=_symbolic(p))
        except KernelError as exc:
            reason = f"symbolic route unavailable: {exc}"
    else:
        reason = "homogeneous solutions are approximate"
    if grid is None:
        raise UnsupportedCombination(reason + "; pass a grid for the numeric route")
    xs = np.asarray(grid, dtype=float)
    vals = nested_quadrature(_numeric_plan(p, xs), xs)
    return ParticularResult("numeric", grid=xs, values=vals, reason=reason)


def particular2(b1: Expr, b2: Expr, y: Expr, rhs: Expr,
                grid: Optional[Sequence[float]] = None, strict: bool = True) -> ParticularResult:
    """Order-2 convenience wrapper: y'' + b1 y' + b2 y = rhs, one known solution y."""
    return particular(NonHomProblem((b1, b2), rhs, (y,), strict=strict), grid)
