"""Command-line interface: ``thirdbvp {solve,study,check,plot} PROBLEM_FILE``.

Exit codes: 0 success, 1 input error, 2 iteration did not converge (or left
the domain of f), 3 uniqueness hypothesis not satisfied.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from typing import Optional, Sequence

import numpy as np

from .analysis import estimate_constants, order_table, uniqueness_report
from .problemspec import ExpressionError, ProblemFileError, read_problem_file
from .quadrature import QuadratureMethod
from .solver import NonFiniteIterate, NotConverged, Problem, SolveResult, SolverConfig, homogenize, solve

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_CONVERGED = 2
EXIT_HYPOTHESIS = 3

_METHODS = {m.value: m for m in QuadratureMethod}
_LABEL = {QuadratureMethod.TRAPEZIUM: "trap", QuadratureMethod.MODIFIED_SIMPSON: "Simp"}


class InputError(Exception):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _load(path: str) -> Problem:
    try:
        return read_problem_file(path)
    except FileNotFoundError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except (ProblemFileError, ExpressionError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _config(n: int, tol: float, max_iter: int, method: QuadratureMethod) -> SolverConfig:
    try:
        return SolverConfig(n=n, tol=tol, max_iter=max_iter, method=method)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _run(problem: Problem, cfg: SolverConfig) -> tuple[SolveResult, Optional[str]]:
    try:
        return solve(problem, cfg), None
    except NotConverged as exc:
        return exc.result, exc.reason


def solution_csv(result: SolveResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "u", "y", "z", "phi"])
    for row in zip(result.t, result.u.values, result.y.values, result.z.values, result.phi.values):
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc


def _summary(result: SolveResult, reason: Optional[str], out) -> None:
    residual = result.residuals[-1] if result.residuals else float("nan")
    print(f"K = {result.iterations}", file=out)
    print(f"converged = {str(result.converged).lower()}", file=out)
    print(f"residual = {residual:.6e}", file=out)
    if reason:
        print(f"note: {reason}", file=out)


def cmd_solve(args, out) -> int:
    problem = _load(args.problem)
    cfg = _config(args.n, args.tol, args.max_iter, _METHODS[args.method])
    result, reason = _run(problem, cfg)
    if args.out:
        _write(args.out, solution_csv(result))
    _summary(result, reason, out)
    return EXIT_OK if reason is None else EXIT_NOT_CONVERGED


# ---------------------------------------------------------------- study


def _n_list(values: Sequence[int], methods: Sequence[QuadratureMethod]) -> list[int]:
    ns = list(values)
    if not ns or min(ns) < 1:
        raise InputError("N values must be positive")
    for a, b in zip(ns, ns[1:]):
        if b != 2 * a:
            raise InputError(f"N values must double: {a} -> {b}")
    if QuadratureMethod.MODIFIED_SIMPSON in methods and any(n % 2 for n in ns):
        raise InputError("modified Simpson needs even N values")
    return ns


def _sci(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.4e}"


def _ord(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.4f}"


def study(problem: Problem, ns: Sequence[int], tol: float, max_iter: int, methods: Sequence[QuadratureMethod]):
    """Solve on every N with every method.

    Returns ``(columns, note)`` where ``columns[method]`` is a list of
    :class:`~thirdbvp.analysis.ConvergenceRow`. Without an exact solution the
    errors are measured against a modified-Simpson solve at ``4 * max(N)``
    with ``tol / 100``; ``note`` then says so.
    """
    note = None
    exact = problem.exact
    if exact is None:
        n_ref = 4 * max(ns)
        n_ref += n_ref % 2
        ref, reason = _run(problem, _config(n_ref, tol / 100.0, max_iter, QuadratureMethod.MODIFIED_SIMPSON))
        if reason:
            raise NotConverged(ref, f"reference solve failed: {reason}")
        stride = n_ref // max(ns)
        ref_u = ref.u.values
        note = f"no exact solution: errors measured against a modified Simpson solve with N={n_ref}, TOL={tol / 100.0:g}"

        def exact_at(n):
            return ref_u[:: stride * (max(ns) // n)]
    else:
        def exact_at(n):
            return np.asarray(exact(np.arange(n + 1) / n), dtype=float)

    columns = {}
    for method in methods:
        rows = []
        for n in ns:
            result, reason = _run(problem, _config(n, tol, max_iter, method))
            if reason:
                raise NotConverged(result, f"N={n} ({method.value}): {reason}")
            err = float(np.max(np.abs(result.u.values - exact_at(n))))
            rows.append((n, result.iterations, err))
        columns[method] = order_table(rows)
    return columns, note


def study_table(columns, fmt: str) -> str:
    methods = list(columns)
    first = columns[methods[0]]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = ["N"]
        for m in methods:
            tag = _LABEL[m].lower()
            header += [f"K_{tag}", f"Error_{tag}", f"Order_{tag}"]
        writer.writerow(header)
        for i, base in enumerate(first):
            line = [base.n]
            for m in methods:
                r = columns[m][i]
                line += [r.k_iters, _fmt(r.error), "" if r.order is None else _fmt(r.order)]
            writer.writerow(line)
        return buf.getvalue()
    header = ["N", "K"]
    for m in methods:
        header += [f"Error_{_LABEL[m]}", "Order"]
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for i, base in enumerate(first):
        ks = sorted({columns[m][i].k_iters for m in methods})
        cells = [str(base.n), "/".join(str(columns[m][i].k_iters) for m in methods) if len(ks) > 1 else str(ks[0])]
        for m in methods:
            r = columns[m][i]
            cells += [_sci(r.error), _ord(r.order)]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def cmd_study(args, out) -> int:
    problem = _load(args.problem)
    methods = [_METHODS[m] for m in args.method] if args.method else list(QuadratureMethod)
    methods = list(dict.fromkeys(methods))
    ns = _n_list(args.n or [8, 16, 32, 64, 128, 256, 512, 1024], methods)
    columns, note = study(problem, ns, args.tol, args.max_iter, methods)
    text = study_table(columns, args.format)
    if args.out:
        _write(args.out, text)
    else:
        out.write(text)
    if note:
        print(f"note: {note}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------- check


def cmd_check(args, out) -> int:
    problem = _load(args.problem)
    if problem.M is None:
        raise InputError("uniqueness check needs M in the problem file")
    if args.samples is not None:
        hp, _ = homogenize(problem)
        try:
            sup_f, L0, L1, L2 = estimate_constants(hp, problem.M, args.samples)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        print(f"sampled on a {args.samples + 1}^4 lattice (lower estimates, not a proof)", file=out)
        print(f"sup|f| = {sup_f:.6g} ({'<=' if sup_f <= problem.M else '>'} M = {problem.M:g})", file=out)
    elif problem.lipschitz is not None:
        L0, L1, L2 = problem.lipschitz
    else:
        raise InputError("no Lipschitz constants L0, L1, L2 in the problem file; pass --samples to estimate them")
    try:
        report = uniqueness_report(problem.M, L0, L1, L2)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    bx, by, bz = report.domain_box
    print(f"M = {report.m_bound:g}", file=out)
    print(f"L0, L1, L2 = {L0:.6g}, {L1:.6g}, {L2:.6g}", file=out)
    print(f"q = L0/12 + L1/8 + L2/2 = {report.q:.6g}", file=out)
    print(f"D_M: |u| <= {bx:.6g}, |u'| <= {by:.6g}, |u''| <= {bz:.6g}", file=out)
    print(f"hypothesis q < 1: {'satisfied' if report.satisfied else 'NOT satisfied'}", file=out)
    return EXIT_OK if report.satisfied else EXIT_HYPOTHESIS


# ---------------------------------------------------------------- plot

_W, _H = 640, 400
_LEFT, _RIGHT, _TOP, _BOTTOM = 70, 20, 20, 50


def solution_svg(t: np.ndarray, u: np.ndarray) -> str:
    """Standalone SVG 1.1 line plot of ``u`` against ``t`` on [0, 1]."""
    lo, hi = float(np.min(u)), float(np.max(u))
    span = hi - lo
    pad = 0.05 * span if span > 0 else max(abs(hi), 1.0) * 0.5
    y0, y1 = lo - pad, hi + pad
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM

    def sx(v):
        return _LEFT + v * pw

    def sy(v):
        return _TOP + (y1 - v) / (y1 - y0) * ph

    pts = " ".join(f"{sx(a):.3f},{sy(b):.3f}" for a, b in zip(t, u))
    base = _TOP + ph
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<line x1="{_LEFT}" y1="{base}" x2="{_LEFT + pw}" y2="{base}" stroke="black"/>',
        f'<line x1="{_LEFT}" y1="{_TOP}" x2="{_LEFT}" y2="{base}" stroke="black"/>',
    ]
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        x = sx(tick)
        parts.append(f'<line x1="{x:.3f}" y1="{base}" x2="{x:.3f}" y2="{base + 5}" stroke="black"/>')
        parts.append(
            f'<text x="{x:.3f}" y="{base + 20}" font-family="sans-serif" font-size="12" text-anchor="middle">{tick:g}</text>'
        )
    for value in (lo, hi) if span > 0 else (lo,):
        y = sy(value)
        parts.append(f'<line x1="{_LEFT - 5}" y1="{y:.3f}" x2="{_LEFT}" y2="{y:.3f}" stroke="black"/>')
        parts.append(
            f'<text x="{_LEFT - 8}" y="{y + 4:.3f}" font-family="sans-serif" font-size="12" text-anchor="end">{value:.4g}</text>'
        )
    parts.append(f'<text x="{_LEFT + pw / 2:.1f}" y="{_H - 8}" font-family="sans-serif" font-size="13" text-anchor="middle">t</text>')
    parts.append(f'<text x="16" y="{_TOP + ph / 2:.1f}" font-family="sans-serif" font-size="13" text-anchor="middle">u</text>')
    parts.append(f'<polyline fill="none" stroke="#1f4e99" stroke-width="1.5" points="{pts}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_plot(args, out) -> int:
    problem = _load(args.problem)
    cfg = _config(args.n, args.tol, args.max_iter, _METHODS[args.method])
    result, reason = _run(problem, cfg)
    _write(args.svg, solution_svg(result.t, result.u.values))
    _summary(result, reason, out)
    return EXIT_OK if reason is None else EXIT_NOT_CONVERGED


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thirdbvp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("problem", help="problem file (key = value format)")
        p.add_argument("--tol", type=float, default=1e-10, help="stop when max|Phi_k+1 - Phi_k| <= TOL")
        p.add_argument("--max-iter", type=int, default=100)

    p = sub.add_parser("solve", help="solve one problem and write the grid solution as CSV")
    common(p)
    p.add_argument("--n", type=int, default=64, help="number of subintervals N")
    p.add_argument("--method", choices=sorted(_METHODS), default="trap")
    p.add_argument("--out", help="CSV output path (columns t,u,y,z,phi)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("study", help="error/order table over a doubling sequence of N")
    common(p)
    p.add_argument("--n", type=int, nargs="+", help="N values, each double the previous (default 8 ... 1024)")
    p.add_argument("--method", choices=sorted(_METHODS), action="append", help="repeatable; default both")
    p.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    p.add_argument("--out", help="write the table here instead of standard output")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("check", help="check the contraction hypothesis q < 1")
    p.add_argument("problem")
    p.add_argument("--samples", type=int, help="estimate sup|f| and L0..L2 on a lattice with this many steps per axis")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("plot", help="solve and write an SVG plot of u")
    common(p)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--method", choices=sorted(_METHODS), default="trap")
    p.add_argument("--svg", required=True, help="SVG output path")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    except (NonFiniteIterate, NotConverged) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_NOT_CONVERGED


if __name__ == "__main__":
    sys.exit(main())
