"""Command-line front end: ``hardybounds {bounds,exact,sweep,verify}``.

Job files hold flat ``key = value`` lines mirroring the long flags (``#``
starts a comment, ``command = sweep`` selects the subcommand, booleans take
true/false). Flags given on the command line override the file.

Exit codes: 0 ok, 2 usage or invalid input, 3 numeric failure, 4 verify failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from typing import Dict, List, Optional, Sequence, Tuple

from .bounds import BoundsReport, HardySetup, SetupError, two_sided
from .exact import DEFAULT_READING, READINGS, improvement_chain
from .expr import EvaluationError, ExpressionSyntaxError
from .measure import (
    EllipticCoefficients,
    Interval,
    MeasureError,
    WeightedMeasure,
    density_from_source,
    dual_measure,
    measures_from_elliptic,
)
from .oracle import OracleError, oracle_ergodic_nonlinear, oracle_linear, oracle_nonlinear
from .quadrature import QuadratureError
from .special import Exponents
from .sweep import SweepError, SweepRow, compute_rows, sweep_points, to_csv

log = logging.getLogger("hardybounds")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4
COMMANDS = ("bounds", "exact", "sweep", "verify")
BOUNDARY_CHOICES = ("ergodic", "dirichlet-left", "dirichlet-right", "dirichlet-both")
BOOL_FLAGS = {"quick", "diagonal", "oracle", "verbose"}
# Flags whose value may start with '-' (for example -inf,inf or a negative theta).
VALUE_FLAGS = {"--interval", "--theta", "--a", "--b", "--mu", "--nu", "--mu-density", "--nu-density",
               "--p-range", "--r-range"}


class UsageError(ValueError):
    pass


# Argument handling -------------------------------------------------------------


def _range(text: str) -> Tuple[float, float]:
    parts = [s.strip() for s in text.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"range must look like 'lo,hi', got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not lo <= hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _common(p: argparse.ArgumentParser):
    p.add_argument("--job", metavar="FILE", help="key = value job file; command-line flags override it")
    p.add_argument("--out", metavar="PATH", help="write CSV output to PATH")
    p.add_argument("--verbose", "-v", action="store_true", help="log progress and diagnostics")


def _exponents(p: argparse.ArgumentParser, required: bool = False):
    p.add_argument("--p", type=float, default=None if required else 2.0, help="exponent p > 1")
    p.add_argument("--q", type=float, default=None if required else 2.0, help="exponent q > 1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hardybounds",
        description="Two-sided estimates of the optimal constant A in weighted Hardy-type inequalities.",
        epilog="Exit codes: 0 ok, 2 usage, 3 numeric failure, 4 verify failure.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    b = sub.add_parser(
        "bounds", help="isoperimetric constants and lower/upper estimates of A",
        description=(
            "Measures come from a catalog name (lebesgue, power:ALPHA, gauss) or an expression in x "
            "using + - * / ^, parentheses, numbers and exp, log, sin, cos, sqrt, abs, pow(a,b). "
            "Alternatively --a/--b/--theta give the elliptic operator a(x) f'' + b(x) f' and define "
            "mu and nu together. Negative values need the --flag=value form or follow the flag directly."
        ),
    )
    _common(b)
    _exponents(b)
    b.add_argument("--interval", help="a,b with -inf/inf allowed (default 0,1; gauss defaults to -inf,inf)")
    b.add_argument("--mu", "--mu-density", dest="mu", help="density of mu: catalog name or expression")
    b.add_argument("--nu", "--nu-density", dest="nu", help="density of nu (defaults to mu)")
    b.add_argument("--a", help="diffusion coefficient a(x) > 0 of the elliptic operator")
    b.add_argument("--b", help="drift b(x) of the elliptic operator")
    b.add_argument("--theta", type=float, help="reference point of the potential (default 0 or the midpoint)")
    b.add_argument("--boundary", choices=BOUNDARY_CHOICES, default="ergodic")
    b.add_argument("--oracle", action="store_true", help="also run the numerical oracle for A")
    b.add_argument("--grid-n", type=int, default=4096, help="oracle grid size (default 4096)")
    b.add_argument("--tol", type=_positive, default=None, help="oracle tolerance")

    e = sub.add_parser("exact", help="Lebesgue model case: exact A and the improvement chain")
    _common(e)
    _exponents(e)
    e.add_argument("--delta1-reading", choices=READINGS, default=DEFAULT_READING)

    s = sub.add_parser("sweep", help="CSV of the improvement chain over a parameter grid")
    _common(s)
    s.add_argument("--p", type=float, help="fixed p for a sweep over r = q - p")
    s.add_argument("--p-range", type=_range, help="lo,hi range of p")
    s.add_argument("--r-range", type=_range, help="lo,hi range of r = q - p")
    s.add_argument("--diagonal", action="store_true", help="sweep q = p over --p-range")
    s.add_argument("--step", type=_positive, default=0.05, help="grid step (default 0.05)")
    s.add_argument("--delta1-reading", choices=READINGS, default=DEFAULT_READING)
    s.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")

    v = sub.add_parser("verify", help="run the cross-module invariant suite")
    _common(v)
    v.add_argument("--quick", action="store_true", help="reduced grids, under 30 s")
    v.add_argument("--delta1-reading", choices=READINGS, default=DEFAULT_READING)
    v.add_argument("--check", action="append", dest="only", help="run only the named check (repeatable)")
    v.add_argument("--_fault-upper-scale", dest="fault_upper_scale", type=float, help=argparse.SUPPRESS)
    return parser


def read_job(path: str) -> Dict[str, str]:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read job file {path}: {exc.strerror}") from None
    out: Dict[str, str] = {}
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if not key:
            raise UsageError(f"{path}:{no}: empty key")
        out[key] = value
    return out


def _job_tokens(job: Dict[str, str]) -> List[str]:
    tokens = []
    for key, value in job.items():
        if key in ("command", "job"):
            continue
        if key in BOOL_FLAGS:
            if value.lower() not in ("true", "false", "yes", "no", "1", "0"):
                raise UsageError(f"job key {key} takes true/false, got {value!r}")
            if value.lower() in ("true", "yes", "1"):
                tokens.append(f"--{key}")
        else:
            tokens.append(f"--{key}={value}")
    return tokens


def _glue_values(argv: Sequence[str]) -> List[str]:
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _find_job(argv: Sequence[str]) -> Optional[str]:
    for i, tok in enumerate(argv):
        if tok == "--job" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--job="):
            return tok.split("=", 1)[1]
    return None


def expand_argv(argv: Sequence[str]) -> List[str]:
    """Merge a job file into argv so that explicit flags win."""
    argv = list(argv)
    path = _find_job(argv)
    if path is None:
        return _glue_values(argv)
    job = read_job(path)
    if argv and argv[0] in COMMANDS:
        command, rest = argv[0], argv[1:]
        if "command" in job and job["command"] != command:
            raise UsageError(f"job file is for '{job['command']}' but '{command}' was requested")
    else:
        command, rest = job.get("command"), argv
        if command not in COMMANDS:
            raise UsageError(f"job file must set command to one of {COMMANDS}")
    return [command] + _job_tokens(job) + _glue_values(rest)


# Commands ----------------------------------------------------------------------


def _boundary(name: str) -> str:
    return name.replace("-", "_")


def _density_measure(source: str, interval: Interval) -> WeightedMeasure:
    dens, label = density_from_source(source)
    return WeightedMeasure(interval, dens, label)


def _default_theta(iv: Interval) -> float:
    if iv.contains(0.0):
        return 0.0
    if math.isfinite(iv.left) and math.isfinite(iv.right):
        return 0.5 * (iv.left + iv.right)
    return iv.left + 1.0 if math.isfinite(iv.left) else iv.right - 1.0


def setup_from_args(args) -> HardySetup:
    exps = Exponents(args.p, args.q)
    boundary = _boundary(args.boundary)
    elliptic = args.a is not None or args.b is not None or args.theta is not None
    if elliptic and (args.mu is not None or args.nu is not None):
        raise UsageError("give either --mu/--nu or the elliptic coefficients --a/--b/--theta, not both")
    if elliptic:
        if args.a is None or args.b is None:
            raise UsageError("the elliptic source needs both --a and --b")
        iv = Interval.parse(args.interval or "0,1")
        theta = _default_theta(iv) if args.theta is None else args.theta
        mu, nu, nu_hat = measures_from_elliptic(EllipticCoefficients(args.a, args.b, theta), iv)
        if exps.p != 2:
            nu_hat = dual_measure(nu, exps.p)
        return HardySetup(iv, mu, nu, nu_hat, exps, boundary)
    mu_src = args.mu or "lebesgue"
    nu_src = args.nu or mu_src
    default_iv = "-inf,inf" if "gauss" in (mu_src, nu_src) else "0,1"
    iv = Interval.parse(args.interval or default_iv)
    mu = _density_measure(mu_src, iv)
    nu = mu if nu_src == mu_src else _density_measure(nu_src, iv)
    return HardySetup(iv, mu, nu, dual_measure(nu, exps.p), exps, boundary)


BOUNDS_COLUMNS = ("boundary", "p", "q", "b_plus", "b_minus", "b_star", "b_substar", "kappa",
                  "lower_A", "upper_A", "factor_used")


def _num(v) -> str:
    return "" if v is None else f"{v:.12g}"


def bounds_csv(rep: BoundsReport, oracle_A: Optional[float] = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = list(BOUNDS_COLUMNS) + (["oracle_A"] if oracle_A is not None else [])
    w.writerow(cols)
    row = [rep.boundary, _num(rep.p), _num(rep.q)] + [
        _num(getattr(rep, k)) for k in ("b_plus", "b_minus", "b_star", "b_substar", "kappa_or_none",
                                        "lower_A", "upper_A", "factor_used")]
    if oracle_A is not None:
        row.append(_num(oracle_A))
    w.writerow(row)
    return buf.getvalue()


def _run_oracle(s: HardySetup, n: int, tol: Optional[float]):
    kw = {"n": n}
    if tol is not None:
        kw["tol"] = tol
    if s.p == 2 and s.q == 2:
        return oracle_linear(s, **kw)
    if s.boundary == "ergodic":
        return oracle_ergodic_nonlinear(s, **kw)
    if s.boundary == "dirichlet_both":
        raise UsageError("the oracle for Dirichlet conditions at both ends needs p = q = 2")
    return oracle_nonlinear(s, **kw)


def _write(path: Optional[str], text: str):
    if path is None:
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def cmd_bounds(args) -> int:
    s = setup_from_args(args)
    rep = two_sided(s)
    lines = rep.lines()
    oracle_A = None
    if args.oracle:
        r = _run_oracle(s, args.grid_n, args.tol)
        oracle_A = r.A_estimate
        tag = "lower bound on A" if r.lower_bound_only else "A"
        lines.append(f"{'oracle':>14}: {tag} ~ {r.A_estimate:.12g} ({r.method}, n = {r.grid_size}, "
                     f"{'converged' if r.converged else 'NOT converged'})")
        lines.extend(f"note: {n}" for n in r.notes)
    print("\n".join(lines))
    _write(args.out, bounds_csv(rep, oracle_A))
    return EXIT_OK


def cmd_exact(args) -> int:
    c = improvement_chain(args.p, args.q, args.delta1_reading)
    names = ("B", "delta1_bar", "A", "A_star", "delta1", "kB")
    print("  ".join(f"{n:>14}" for n in names))
    print("  ".join(f"{v:>14.12g}" for v in c.values()))
    print(f"gamma* = {c.gamma_star:.12g}   delta1 reading {c.reading}")
    _write(args.out, to_csv([SweepRow.from_chain(c)]))
    if c.violations:
        for v in c.violations:
            print(f"ordering violated: {v}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_sweep(args) -> int:
    points = sweep_points(p=args.p, r_range=args.r_range, p_range=args.p_range,
                          step=args.step, diagonal=args.diagonal)
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    rows = compute_rows(points, args.delta1_reading, workers=args.workers)
    bad = [v for r in rows for v in r.violations]
    bad += [f"non-finite value at p={r.p:g}, q={r.q:g}" for r in rows
            if not all(math.isfinite(x) for x in r.values)]
    if bad:
        for v in bad[:20]:
            print(f"row check failed: {v}", file=sys.stderr)
        print(f"sweep aborted: {len(bad)} row check(s) failed; no CSV written", file=sys.stderr)
        return EXIT_NUMERIC
    text = to_csv(rows)
    if args.out is None:
        sys.stdout.write(text)
    else:
        _write(args.out, text)
        print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import check_names, run_verify

    unknown = sorted(set(args.only or ()) - set(check_names()))
    if unknown:
        raise UsageError(f"unknown check {', '.join(unknown)}; choose from {', '.join(check_names())}")
    report = run_verify(quick=args.quick, reading=args.delta1_reading, only=args.only,
                        _fault_upper_scale=args.fault_upper_scale,
                        progress=lambda r: print(r.line(), flush=True))
    print(report.lines()[-1])
    if args.out:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("check", "status", "hard", "seconds", "detail"))
        for r in report.results:
            w.writerow((r.name, "pass" if r.passed else "fail", r.hard, f"{r.seconds:.2f}", r.detail))
        _write(args.out, buf.getvalue())
    return EXIT_OK if report.ok else EXIT_VERIFY


HANDLERS = {"bounds": cmd_bounds, "exact": cmd_exact, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = expand_argv(argv)
    except UsageError as exc:
        print(f"hardybounds: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return HANDLERS[args.command](args)
    except (QuadratureError, OracleError, EvaluationError, ArithmeticError) as exc:
        print(f"hardybounds: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, SetupError, MeasureError, SweepError, ExpressionSyntaxError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"hardybounds: error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
