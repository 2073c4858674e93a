"""Command-line front end.

Exit codes: 0 success, 1 unexpected error, 2 parse error, 3 unsupported
combination, 4 self-test failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import mpmath
import numpy as np

from . import __version__
from .exprkernel import (
    WORKING_DPS,
    CenterMismatch,
    DomainError,
    Expr,
    ExprSyntaxError,
    KernelError,
    NonElementary,
    UnsupportedCombination,
    const,
    evaluate,
    format_expr,
    infer_center,
    parse,
)
from .morder import ODEm, XiMatrix, assemble_m
from .nimage2 import GeneralODE2, XiTable, assemble2, reduce_to_normal, xi_general
from .nonhom import NonHomProblem, apply_lhs, particular
from .verify import _mp, closed_form_suite, crosscheck_suite, leibniz_suite, residual_report

EXIT_OK, EXIT_ERROR, EXIT_PARSE, EXIT_UNSUPPORTED, EXIT_SELFTEST = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a rational number: {text!r}") from exc


def _grid(text: Optional[str], center: Fraction) -> List[Fraction]:
    if text is None:
        return [center + i for i in range(1, 6)]
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError("grid must look like lo:hi:count")
    lo, hi = _fraction(parts[0]), _fraction(parts[1])
    try:
        count = int(parts[2])
    except ValueError as exc:
        raise UsageError("grid count must be an integer") from exc
    if count < 2 or hi <= lo:
        raise UsageError("grid needs count >= 2 and lo < hi")
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def _center(args, texts: Sequence[str]) -> Fraction:
    if args.center is not None:
        return _fraction(args.center)
    return infer_center(texts)


def _coeff_map(items: Sequence[str], prefix: str, m: int) -> Dict[int, str]:
    out: Dict[int, str] = {}
    for item in items or []:
        name, sep, text = item.partition("=")
        name = name.strip()
        if not sep or not name.startswith(prefix) or not name[len(prefix):].isdigit():
            raise UsageError(f"coefficient must look like {prefix}P=<expr>, got {item!r}")
        p = int(name[len(prefix):])
        if not 1 <= p <= m:
            raise UsageError(f"coefficient index {p} outside 1..{m}")
        out[p] = text
    return out


def _delta_repr(d, digits: int):
    return "undefined" if d is None else mpmath.nstr(d, min(digits, 17))


def _report(problem: dict, xi=(), alpha=(), solutions=(), residual=(), extra=None) -> dict:
    rep = {
        "problem": problem,
        "xi": [{"s": s, "n": n, "expr": format_expr(e)} for s, n, e in xi],
        "alpha": [{"k": k, "expr": format_expr(e)} for k, e in alpha],
        "solutions": [{"i": i, "expr": format_expr(e)} for i, e in solutions],
        "residual": [{"x": float(x), "delta": "undefined" if d is None else float(d)}
                     for x, d in residual],
    }
    if extra:
        rep.update(extra)
    return rep


def _emit(rep: dict, fmt: str, digits: int, raw_xi, raw_alpha, raw_solutions, raw_residual,
          out) -> None:
    if fmt == "json":
        out.write(json.dumps(rep, indent=2, sort_keys=False) + "\n")
        return
    if fmt == "csv":
        out.write("x,delta\n")
        for x, d in raw_residual:
            out.write(f"{_num(x)},{_delta_repr(d, digits)}\n")
        return
    latex = fmt == "latex"
    problem = rep["problem"]
    if latex:
        out.write("% " + ", ".join(f"{k} = {v}" for k, v in problem.items()) + "\n")
    else:
        out.write("problem: " + ", ".join(f"{k} = {v}" for k, v in problem.items()) + "\n")
    style = "latex" if latex else "text"
    for s, n, e in raw_xi:
        name = f"\\xi_{{{s}}}(-{n})" if latex else f"xi_{s}(-{n})"
        out.write(_line(name, format_expr(e, style), latex))
    for k, e in raw_alpha:
        name = f"\\alpha(-{k})" if latex else f"alpha(-{k})"
        out.write(_line(name, format_expr(e, style), latex))
    for i, e in raw_solutions:
        name = f"y_{{{i}}}" if latex else f"y{i}"
        out.write(_line(name, format_expr(e, style), latex))
    for key in ("values",):
        for row in rep.get(key, []):
            out.write(f"value x = {row['x']!r}: y = {row['y']!r}\n")
    if raw_residual:
        out.write("residual:\n")
        for x, d in raw_residual:
            out.write(f"  x = {_num(x)}: delta = {_delta_repr(d, digits)}\n")


def _line(name: str, body: str, latex: bool) -> str:
    return f"\\[ {name} = {body} \\]\n" if latex else f"{name} = {body}\n"


def _num(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else repr(float(x))
    return repr(float(x))


# -- subcommands ----------------------------------------------------------

def _cmd_solve2(args, out) -> int:
    center = _center(args, [args.a])
    a = parse(args.a, center)
    table = XiTable(a)
    sol = assemble2(a, args.terms, table)
    s1, s2 = table.alpha(args.terms)
    xi = [(k, n, table.xi_neg(k)[n - 1]) for k in range(args.terms + 1) for n in (1, 2)]
    alpha = [(1, s1), (2, s2)]
    ys = [(1, sol.y1), (2, sol.y2)]
    y = _pick(ys, args.solution)
    res = residual_report((const(0, center), a), y, _grid(args.grid, center), dps=args.dps).samples
    problem = {"kind": "solve2", "a": format_expr(a), "terms": args.terms,
               "center": str(center), "residual_solution": args.solution}
    rep = _report(problem, xi, alpha, ys, res)
    _emit(rep, args.format, args.digits, xi, alpha, ys, res, out)
    return EXIT_OK


def _pick(ys, i):
    if not 1 <= i <= len(ys):
        raise UsageError(f"--solution must be in 1..{len(ys)}")
    return ys[i - 1][1]


def _cmd_solve2g(args, out) -> int:
    center = _center(args, [args.a1, args.a2])
    a1, a2 = parse(args.a1, center), parse(args.a2, center)
    reduced, gauge = reduce_to_normal(GeneralODE2(a1, a2))
    a = reduced.a
    table = XiTable(a)
    sol = assemble2(a, args.terms, table)
    zs = [(1, sol.y1), (2, sol.y2)]
    form = "y"
    try:
        mult = gauge.as_expr()
        ys = [(i, mult * z) for i, z in zs]
    except UnsupportedCombination:
        ys, form = zs, "z"
    xi = [(k, n, table.xi_neg(k)[n - 1]) for k in range(args.terms + 1) for n in (1, 2)]
    z = _pick(zs, args.solution)
    res = residual_report((a1, a2), z, _grid(args.grid, center), gauge=gauge, dps=args.dps).samples
    problem = {"kind": "solve2g", "a1": format_expr(a1), "a2": format_expr(a2),
               "reduced_a": format_expr(a), "gauge_exponent": format_expr(gauge.exponent),
               "solution_form": form, "terms": args.terms, "center": str(center),
               "residual_solution": args.solution}
    rep = _report(problem, xi, (), ys, res)
    _emit(rep, args.format, args.digits, xi, (), ys, res, out)
    return EXIT_OK


def _cmd_solvem(args, out) -> int:
    m = args.order
    if m < 1:
        raise UsageError("--order must be positive")
    texts = _coeff_map(args.coeff, "a", m)
    center = _center(args, list(texts.values()))
    sign = -1 if args.lhs else 1
    coeffs = tuple(parse(texts[p], center).scale(sign) if p in texts else const(0, center)
                   for p in range(1, m + 1))
    if all(c.is_zero() for c in coeffs):
        raise UsageError("at least one coefficient must be nonzero")
    ode = ODEm(coeffs)
    matrix = XiMatrix.from_ode(ode)
    sol = assemble_m(matrix, args.terms)
    xi = [(s, n, matrix.xi(s, n)) for s in range(args.terms + 1) for n in range(1, m + 1)]
    alpha = [(k, sol.alphas[k - 1]) for k in range(1, m + 1)]
    ys = [(i, sol.solutions[i - 1]) for i in range(1, m + 1)]
    y = _pick(ys, args.solution)
    res = residual_report(coeffs, y, _grid(args.grid, center), dps=args.dps).samples
    problem = {"kind": "solvem", "order": m,
               "a": {f"a{p}": format_expr(c) for p, c in enumerate(coeffs, 1)},
               "adjoint": {f"b{p}": format_expr(c) for p, c in enumerate(matrix.b, 1)},
               "terms": args.terms, "center": str(center), "residual_solution": args.solution}
    rep = _report(problem, xi, alpha, ys, res)
    _emit(rep, args.format, args.digits, xi, alpha, ys, res, out)
    return EXIT_OK


def _cmd_xi(args, out) -> int:
    center = _center(args, [args.a])
    a = parse(args.a, center)
    if args.k < 0:
        raise UsageError("--k must be non-negative")
    e = xi_general(XiTable(a), args.k, args.arg)
    if args.format == "json":
        out.write(json.dumps({"problem": {"kind": "xi", "a": format_expr(a), "k": args.k,
                                          "arg": args.arg, "center": str(center)},
                              "xi": [{"s": args.k, "n": -args.arg, "expr": format_expr(e)}],
                              "alpha": [], "solutions": [], "residual": []}, indent=2) + "\n")
    else:
        out.write(format_expr(e, "latex" if args.format == "latex" else "text") + "\n")
    return EXIT_OK


def _cmd_particular(args, out) -> int:
    m = args.order
    if m < 1:
        raise UsageError("--order must be positive")
    texts = _coeff_map(args.coeff, "b", m)
    homog = [t for t in (args.homog or "").split(",") if t.strip()] if m > 1 else []
    center = _center(args, list(texts.values()) + [args.rhs] + homog)
    b = tuple(parse(texts[p], center) if p in texts else const(0, center) for p in range(1, m + 1))
    rhs = parse(args.rhs, center)
    ys = tuple(parse(t, center) for t in homog)
    prob = NonHomProblem(b, rhs, ys, strict=not args.approximate)
    grid = _grid(args.grid, center)
    num_grid = np.array([float(x) for x in grid]) if args.grid else None
    result = particular(prob, num_grid)
    problem = {"kind": "particular", "order": m,
               "b": {f"b{p}": format_expr(c) for p, c in enumerate(b, 1)},
               "rhs": format_expr(rhs), "homog": [format_expr(y) for y in ys],
               "method": result.method, "center": str(center)}
    if result.reason:
        problem["reason"] = result.reason
    if result.method == "symbolic":
        Y = result.expr
        resid_expr = apply_lhs(b, Y) - rhs
        res = []
        for x in grid:
            try:
                fx = evaluate(rhs, x, args.dps)
                rx = evaluate(resid_expr, x, args.dps)
            except DomainError:
                res.append((x, None))
                continue
            res.append((x, None if fx == 0 else abs(_mp(rx) / _mp(fx))))
        sols = [(1, Y)]
        rep = _report(problem, (), (), sols, res)
        _emit(rep, args.format, args.digits, (), (), sols, res, out)
    else:
        values = [{"x": float(x), "y": float(v)} for x, v in zip(result.grid, result.values)]
        rep = _report(problem, extra={"values": values})
        _emit(rep, args.format, args.digits, (), (), (), [], out)
    return EXIT_OK


def _cmd_selftest(args, out) -> int:
    suite = {"leibniz": leibniz_suite, "closedforms": closed_form_suite,
             "crosscheck": crosscheck_suite}[args.suite]
    checks, failures = suite()
    out.write(f"{args.suite}: {checks - len(failures)}/{checks} checks passed\n")
    for f in failures:
        out.write(f"  FAILED {f}\n")
    return EXIT_SELFTEST if failures else EXIT_OK


# -- argument parsing -----------------------------------------------------

def _digits(text: str) -> int:
    v = int(text)
    if v < 30:
        raise argparse.ArgumentTypeError("--digits must be at least 30")
    return v


def _terms(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("--terms must be non-negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="odeseries",
        description="Closed-form series solutions of linear ODEs with variable coefficients.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, solution=True):
        p.add_argument("--terms", type=_terms, default=7, help="truncation index N (default 7)")
        p.add_argument("--center", help="expansion center (inferred when omitted)")
        p.add_argument("--grid", help="residual sample points lo:hi:count "
                                      "(default: five unit-spaced points right of the center)")
        p.add_argument("--format", choices=("text", "json", "csv", "latex"), default="text")
        p.add_argument("--digits", type=_digits, default=WORKING_DPS,
                       help="working precision in decimal digits (>= 30)")
        if solution:
            p.add_argument("--solution", type=int, default=1,
                           help="which partial solution the residual report covers")

    p = sub.add_parser("solve2", help="y'' = a(x) y")
    p.add_argument("--a", required=True)
    common(p)
    p.set_defaults(func=_cmd_solve2)

    p = sub.add_parser("solve2g", help="y'' = a1(x) y' + a2(x) y")
    p.add_argument("--a1", required=True)
    p.add_argument("--a2", required=True)
    common(p)
    p.set_defaults(func=_cmd_solve2g)

    p = sub.add_parser("solvem", help="y^(m) = a1 y^(m-1) + ... + am y")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--coeff", action="append", metavar="aP=EXPR", default=[])
    p.add_argument("--lhs", action="store_true",
                   help="coefficients are given for y^(m) + a1 y^(m-1) + ... = 0")
    common(p)
    p.set_defaults(func=_cmd_solvem)

    p = sub.add_parser("xi", help="single coefficient xi_k(p) of y'' = a y")
    p.add_argument("--a", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--arg", type=int, required=True)
    p.add_argument("--center")
    p.add_argument("--format", choices=("text", "json", "latex"), default="text")
    p.set_defaults(func=_cmd_xi)

    p = sub.add_parser("particular", help="y^(m) + b1 y^(m-1) + ... + bm y = F")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--coeff", action="append", metavar="bP=EXPR", default=[])
    p.add_argument("--rhs", required=True)
    p.add_argument("--homog", help="comma-separated homogeneous solutions (m-1 of them)")
    p.add_argument("--approximate", action="store_true",
                   help="accept approximate homogeneous solutions (numeric route)")
    common(p, solution=False)
    p.set_defaults(func=_cmd_particular)

    p = sub.add_parser("selftest", help="run an identity suite")
    p.add_argument("suite", choices=("leibniz", "closedforms", "crosscheck"))
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as exc:
        return int(exc.code or 0)
    if hasattr(args, "digits"):
        args.dps = max(args.digits, 30)
    try:
        return args.func(args, out)
    except (ExprSyntaxError, UsageError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_PARSE
    except (UnsupportedCombination, CenterMismatch, NonElementary) as exc:
        err.write(f"unsupported: {exc}\n")
        return EXIT_UNSUPPORTED
    except (KernelError, ValueError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
