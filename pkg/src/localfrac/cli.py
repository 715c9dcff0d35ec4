"""Command-line front end.

Usage::

    localfrac eval  --function "sqrt(t)" --kernel conformable --alpha 0.5 --at 1
    localfrac table --function "t^2" --kernel shifted:1 --alpha 0.5 --from 1 --to 3 --points 5
    localfrac sweep --function "t^2" --at 4 --alphas 0.25,0.5,1
    localfrac check --function "sin(t)*exp(t)" --alpha 0.7 --from 0.1 --to 5 --points 50
    localfrac integrate --function "cos(t)" --alpha 0.5 --to 1
    localfrac solve --lambda 1 --alpha 0.5 --to 1

Every verb writes records with the fields ``t, alpha, value, method,
error_estimate``, as CSV (with header) or as a JSON array, to standard output
or ``--out``. Numbers carry 17 significant digits so doubles round-trip.

Exit codes: 0 success, 1 computation error, 2 usage error, 3 failed check.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .errors import KernelDomainError, LocalFracError, ParseError
from .expr import ExprAst, parse
from .fraccalc import OdeConfig, alpha_integral, solve_alpha_ode
from .kernel import KernelSpec, builtin_kernel, custom_kernel
from .localderiv import (
    alpha_deriv_at_start,
    alpha_deriv_closed,
    alpha_deriv_limit,
    check_equivalence,
)

__all__ = ["CliCommand", "parse_args", "parse_kernel", "run", "main", "FIELDS"]

FIELDS = ("t", "alpha", "value", "method", "error_estimate")
VERBS = ("eval", "table", "check", "integrate", "solve", "sweep")

_EXPR_KERNEL = re.compile(r"^expr:(?P<body>.+),\s*a=(?P<a>[^,]+),\s*b=(?P<b>[^,]+)$")


@dataclass
class CliCommand:
    verb: str
    kernel: KernelSpec
    alpha: float | None = None
    function: ExprAst | None = None
    at: float | None = None
    start: float | None = None
    stop: float | None = None
    points: int | None = None
    method: str = "closed"
    alphas: tuple[float, ...] = ()
    rhs: ExprAst | None = None
    y0: float = 1.0
    rtol: float = 1e-8
    atol: float = 1e-10
    tol: float = 1e-6
    fmt: str = "csv"
    out: str | None = None
    extra: dict = field(default_factory=dict)


def parse_kernel(text: str) -> KernelSpec:
    """``conformable | shifted[:a] | gamma[:a] | expr:<body>,a=<a>,b=<b>``."""
    text = text.strip()
    if text == "conformable":
        return builtin_kernel("conformable")
    name, _, arg = text.partition(":")
    if name == "shifted":
        return builtin_kernel("shifted", float(arg) if arg else 0.0)
    if name in ("gamma", "gamma_shifted"):
        return builtin_kernel("gamma_shifted", float(arg) if arg else 0.0)
    if name == "expr":
        m = _EXPR_KERNEL.match(text)
        if not m:
            raise ValueError("expected expr:<expression>,a=<a>,b=<b>")
        return custom_kernel(parse(m["body"]), float(m["a"]), float(m["b"]))
    raise ValueError(f"unknown kernel {text!r}; use conformable, shifted:<a>, gamma or expr:<expression>,a=<a>,b=<b>")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="localfrac",
        description=(
            "Kernel local fractional derivatives f^(alpha)(t) = k(t)^(1-alpha) f'(t). "
            "Expressions use t, + - * / ^, sin cos tan exp ln sqrt abs, pi, e; "
            "'^' is right-associative and binds tighter than unary minus, so -t^2 = -(t^2)."
        ),
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, alpha=True):
        p.add_argument("--kernel", default="conformable", help="conformable | shifted:<a> | gamma | expr:<e>,a=<a>,b=<b>")
        if alpha:
            p.add_argument("--alpha", type=float, required=True, help="order in (0,1]")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
        p.add_argument("--out", help="write to this path instead of standard output")

    p = sub.add_parser("eval", help="alpha-derivative at one point")
    p.add_argument("--function", required=True)
    p.add_argument("--at", type=float, required=True)
    p.add_argument("--method", choices=("limit", "closed", "both"), default="closed")
    common(p)

    p = sub.add_parser("table", help="alpha-derivative on a uniform grid")
    p.add_argument("--function", required=True)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--method", choices=("limit", "closed", "both"), default="closed")
    common(p)

    p = sub.add_parser("sweep", help="closed-form alpha-derivative at one point across orders")
    p.add_argument("--function", required=True)
    p.add_argument("--at", type=float, required=True)
    p.add_argument("--alphas", help="comma-separated orders; default: --points orders evenly spaced up to 1")
    p.add_argument("--points", type=int, default=10)
    common(p, alpha=False)

    p = sub.add_parser("check", help="compare limit and closed-form routes on a grid")
    p.add_argument("--function", required=True)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-6, help="maximum relative discrepancy")
    common(p)

    p = sub.add_parser("integrate", help="alpha-integral from the domain start to --to")
    p.add_argument("--function", required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    common(p)

    p = sub.add_parser("solve", help="solve y^(alpha) = F(t, y) from the domain start")
    rhs = p.add_mutually_exclusive_group(required=True)
    rhs.add_argument("--rhs", help="right-hand side F in t and y")
    rhs.add_argument("--lambda", dest="lam", type=float, help="shorthand for F = lambda*y")
    p.add_argument("--y0", type=float, default=1.0)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--points", type=int, help="report dense output on this many uniform points")
    p.add_argument("--rtol", type=float, default=1e-8)
    p.add_argument("--atol", type=float, default=1e-10)
    common(p)
    return parser


def parse_args(argv: list[str] | None = None) -> CliCommand:
    """Validate ``argv`` into a command; usage errors exit with status 2."""
    parser = _build_parser()
    ns = parser.parse_args(argv)

    alpha = getattr(ns, "alpha", None)
    if alpha is not None and not 0.0 < alpha <= 1.0:
        parser.error("alpha must be in (0,1]")
    try:
        kernel = parse_kernel(ns.kernel)
    except (ValueError, LocalFracError) as exc:
        parser.error(f"--kernel: {exc}")

    cmd = CliCommand(verb=ns.verb, kernel=kernel, alpha=alpha, fmt=ns.fmt, out=ns.out)
    if hasattr(ns, "function"):
        try:
            cmd.function = parse(ns.function)
        except ParseError as exc:
            parser.error(f"--function: {exc}")
    for name in ("at", "start", "stop", "method", "tol", "y0", "rtol", "atol"):
        if getattr(ns, name, None) is not None:
            setattr(cmd, name, getattr(ns, name))
    points = getattr(ns, "points", None)
    if points is not None and points < (1 if ns.verb == "sweep" else 2):
        parser.error("--points is too small")
    cmd.points = points

    if ns.verb in ("table", "check") and not ns.stop > ns.start:
        parser.error("--to must exceed --from")
    if ns.verb == "sweep":
        if ns.alphas:
            try:
                cmd.alphas = tuple(float(x) for x in ns.alphas.split(","))
            except ValueError:
                parser.error("--alphas must be comma-separated numbers")
        else:
            cmd.alphas = tuple(float(x) for x in np.linspace(1.0 / ns.points, 1.0, ns.points))
        if any(not 0.0 < x <= 1.0 for x in cmd.alphas):
            parser.error("alpha must be in (0,1]")
    if ns.verb == "solve":
        if ns.rhs is not None:
            try:
                cmd.rhs = parse(ns.rhs, variables=("t", "y"))
            except ParseError as exc:
                parser.error(f"--rhs: {exc}")
        else:
            cmd.rhs = parse(f"({ns.lam!r})*y", variables=("t", "y"))
        if ns.rtol <= 0 or ns.atol <= 0:
            parser.error("--rtol and --atol must be positive")
    return cmd


# -- execution ------------------------------------------------------------------


def _record(t, alpha, value, method, error_estimate) -> dict:
    return {"t": float(t), "alpha": float(alpha), "value": float(value), "method": method,
            "error_estimate": float(error_estimate)}


def _derivative_rows(cmd: CliCommand, t: float, stderr: TextIO) -> list[dict]:
    f, k, alpha = cmd.function, cmd.kernel, cmd.alpha
    if t < k.a:
        raise KernelDomainError(f"t={t!r} precedes the kernel domain start a={k.a!r}")
    if t == k.a:
        r = alpha_deriv_at_start(f, k, alpha)
        if r.diverged:
            print(f"eval: the boundary limit at t={t!r} diverges", file=stderr)
        return [_record(t, alpha, r.value, r.method, r.error_estimate)]
    methods = ("limit", "closed") if cmd.method == "both" else (cmd.method,)
    rows = []
    for m in methods:
        r = alpha_deriv_limit(f, k, alpha, t) if m == "limit" else alpha_deriv_closed(f, k, alpha, t)
        rows.append(_record(t, alpha, r.value, r.method, r.error_estimate))
    return rows


def _grid(start: float, stop: float, n: int) -> list[float]:
    return [float(x) for x in np.linspace(start, stop, n)]


def _execute(cmd: CliCommand, stderr: TextIO) -> tuple[list[dict], int]:
    verb = cmd.verb
    if verb == "eval":
        return _derivative_rows(cmd, cmd.at, stderr), 0
    if verb == "table":
        rows = []
        for t in _grid(cmd.start, cmd.stop, cmd.points):
            rows.extend(_derivative_rows(cmd, t, stderr))
        return rows, 0
    if verb == "sweep":
        rows = []
        for alpha in cmd.alphas:
            r = alpha_deriv_closed(cmd.function, cmd.kernel, alpha, cmd.at)
            rows.append(_record(cmd.at, alpha, r.value, r.method, r.error_estimate))
        return rows, 0
    if verb == "check":
        report = check_equivalence(cmd.function, cmd.kernel, cmd.alpha, _grid(cmd.start, cmd.stop, cmd.points))
        for p in report.failures:
            print(f"check: point t={p.t!r} failed: {p.error}", file=stderr)
        worst = report.worst
        if worst is None:
            rows = [_record(math.nan, cmd.alpha, math.nan, "check", math.nan)]
        else:
            rows = [_record(worst.t, cmd.alpha, worst.discrepancy, "check", worst.limit_error)]
        passed = report.passed(cmd.tol)
        if not passed and not report.failures:
            print(f"check: max relative discrepancy {report.max_discrepancy!r} >= tol {cmd.tol!r}", file=stderr)
        return rows, 0 if passed else 3
    if verb == "integrate":
        value, err = alpha_integral(cmd.function, cmd.kernel, cmd.alpha, cmd.stop, full_output=True)
        return [_record(cmd.stop, cmd.alpha, value, "tanh_sinh", err)], 0
    # solve
    sol = solve_alpha_ode(cmd.rhs, cmd.kernel, cmd.alpha, cmd.y0, cmd.stop, cfg=OdeConfig(rel_tol=cmd.rtol, abs_tol=cmd.atol))
    if cmd.points:
        ts = np.linspace(sol.t[0], sol.t[-1], cmd.points)
        values = sol(ts)
        idx = np.clip(np.searchsorted(sol.t, ts, side="left"), 0, len(sol.t) - 1)
        return [_record(t, cmd.alpha, v, "dense", sol.local_errors[i]) for t, v, i in zip(ts, values, idx)], 0
    methods = ["initial", "bootstrap"] + ["dopri54"] * (len(sol.t) - 2)
    return [_record(t, cmd.alpha, v, m, e) for t, v, m, e in zip(sol.t, sol.y, methods, sol.local_errors)], 0


def _fmt(x: float) -> str:
    return format(x, ".17g")


def render(rows: list[dict], fmt: str) -> str:
    """Serialize records as CSV (header first) or a JSON array."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(FIELDS)
        for r in rows:
            writer.writerow([r["method"] if name == "method" else _fmt(r[name]) for name in FIELDS])
        return buf.getvalue()
    items = []
    for r in rows:
        parts = []
        for name in FIELDS:
            v = r[name]
            if name == "method":
                text = json.dumps(v)
            else:
                text = _fmt(v) if math.isfinite(v) else "null"
            parts.append(f"{json.dumps(name)}: {text}")
        items.append("  {" + ", ".join(parts) + "}")
    return "[\n" + ",\n".join(items) + "\n]\n" if items else "[]\n"


def run(cmd: CliCommand, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    """Execute ``cmd``, emit its records, and return the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        rows, code = _execute(cmd, stderr)
    except (LocalFracError, ArithmeticError, ValueError) as exc:
        kind = exc.kind if isinstance(exc, LocalFracError) else type(exc).__name__
        print(f"error [{kind}]: {exc}", file=stderr)
        return 1
    text = render(rows, cmd.fmt)
    if cmd.out:
        with open(cmd.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return code


def main(argv: list[str] | None = None) -> int:
    return run(parse_args(argv))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
