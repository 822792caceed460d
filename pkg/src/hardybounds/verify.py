"""Cross-module invariant suite run by ``hardybounds verify``.

Hard checks decide the exit status; soft checks (qualitative trends) only
warn. Every check is named so a failure points at the broken invariant.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

from . import bounds as _bounds
from .bounds import (
    BOUNDARIES,
    HardySetup,
    b_minus,
    b_plus,
    b_star,
    b_substar,
    kappa,
    kappa0,
    scale_mu,
    scale_nu,
    swap_for_duality,
    two_sided,
)
from .catalog import CATALOG, catalog_setup
from .exact import DEFAULT_READING, exact_A, improvement_chain, prop_B
from .measure import EllipticCoefficients, Interval, measures_from_elliptic
from .oracle import OracleError, oracle_ergodic_nonlinear, oracle_linear, oracle_nonlinear
from .special import Exponents, k_factor, log_beta
from .sweep import compute_rows, sweep_points

log = logging.getLogger(__name__)

__all__ = ["CheckResult", "VerifyReport", "run_verify", "P_GRID", "R_GRID"]

P_GRID = (1.2, 1.5, 2.0, 3.0, 5.0, 10.0, 30.0)
R_GRID = (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 15.0)
SANDWICH_SLACK = 1e-6
REL_TOL = 1e-8


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    hard: bool = True
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else ("FAIL" if self.hard else "WARN")
        return f"{status}  {self.name}  ({self.seconds:.1f}s)  {self.detail}"


@dataclass
class VerifyReport:
    results: List[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results if r.hard)

    @property
    def failures(self) -> List[CheckResult]:
        return [r for r in self.results if r.hard and not r.passed]

    def lines(self) -> List[str]:
        out = [r.line() for r in self.results]
        bad = self.failures
        out.append("verify: " + ("all hard checks passed" if not bad else
                                 "failed: " + ", ".join(r.name for r in bad)))
        return out


class _Tally:
    """Collects individual comparisons of one check."""

    def __init__(self):
        self.count = 0
        self.errors: List[str] = []

    def expect(self, cond: bool, message: str):
        self.count += 1
        if not cond:
            self.errors.append(message)

    def close(self, got: float, want: float, tol: float, what: str, relative: bool = True):
        if math.isinf(got) or math.isinf(want):
            self.expect(got == want, f"{what}: {got!r} vs {want!r}")
            return
        scale = max(abs(want), 1e-300) if relative else 1.0
        err = abs(got - want) / scale
        self.expect(err <= tol, f"{what}: {got:.12g} vs {want:.12g} (error {err:.2e})")

    def result(self) -> Tuple[bool, str]:
        if self.errors:
            more = f" (+{len(self.errors) - 1} more)" if len(self.errors) > 1 else ""
            return False, f"{len(self.errors)}/{self.count} failed; first: {self.errors[0]}{more}"
        return True, f"{self.count} comparisons"


def _rel_le(a: float, b: float, tol: float) -> bool:
    """a <= b up to relative slack, with inf <= inf."""
    if math.isinf(b):
        return True
    return a <= b + tol * max(abs(b), 1.0)


# Individual checks ------------------------------------------------------------


def check_exact_regression(quick: bool) -> _Tally:
    t = _Tally()
    t.close(exact_A(2, 2), 2 / math.pi, 1e-12, "A(2,2) vs 2/pi", relative=False)
    for p in (1.5, 2.0, 3.0, 5.0, 10.0):
        diag = p * math.sin(math.pi / p) / (math.pi * (p - 1) ** (1 / p))
        t.close(exact_A(p, p), diag, 1e-12, f"A({p:g},{p:g}) vs diagonal form", relative=False)
    # Beta from the standard library's log-gamma, independent of special.log_beta.
    beta = math.exp(math.lgamma(0.25) + math.lgamma(0.5) - math.lgamma(0.75))
    want = 2 ** 0.25 * 4 ** 0.5 * 6 ** 0.25 / beta
    t.close(exact_A(2, 4), want, 1e-9, "A(2,4) vs lgamma Beta", relative=False)
    t.close(log_beta(0.25, 0.5), math.log(beta), 1e-12, "log B(1/4,1/2)", relative=False)
    return t


def check_oracle_reproduction(quick: bool) -> _Tally:
    t = _Tally()
    left = oracle_linear(catalog_setup("lebesgue", 2, 2, "dirichlet_left"), n=4096)
    t.close(left.A_estimate, 2 / math.pi, 1e-4, "linear dirichlet_left vs 2/pi", relative=False)
    erg = oracle_linear(catalog_setup("lebesgue", 2, 2, "ergodic"), n=4096)
    t.close(erg.A_estimate, 1 / math.pi, 1e-4, "linear ergodic vs 1/pi", relative=False)
    for r in (left, erg):
        t.close(r.rayleigh, r.eigenvalue, REL_TOL, f"{r.method} Rayleigh quotient vs eigenvalue")
    for p, q in ((2, 2), (3, 3), (5, 5), (2, 4)):
        r = oracle_nonlinear(catalog_setup("lebesgue", p, q, "dirichlet_left"), n=4096)
        t.close(r.A_estimate, exact_A(p, q), 1e-3, f"nonlinear ({p},{q}) vs exact A", relative=False)
        t.expect(r.converged, f"nonlinear ({p},{q}) did not converge")
    return t


def check_closed_form_bounds(quick: bool) -> _Tally:
    """Assembled Lebesgue estimates against their closed forms."""
    t = _Tally()
    for p, q in ((2, 2), (2, 4), (3, 3)):
        rep = two_sided(catalog_setup("lebesgue", p, q, "dirichlet_left"))
        b = prop_B(p, q)
        t.close(rep.lower_A, b, REL_TOL, f"lower ({p},{q}) dirichlet_left")
        t.close(rep.upper_A, k_factor(Exponents(p, q)) * b, REL_TOL, f"upper ({p},{q}) dirichlet_left")
    for boundary, lo in (("ergodic", 0.25), ("dirichlet_both", 0.25)):
        rep = two_sided(catalog_setup("lebesgue", 2, 2, boundary))
        t.close(rep.lower_A, lo, REL_TOL, f"lower (2,2) {boundary}")
        t.close(rep.upper_A, 2 * lo, REL_TOL, f"upper (2,2) {boundary}")
    return t


def _oracle_for(s: HardySetup):
    if s.p == 2 and s.q == 2:
        return oracle_linear(s)
    if s.boundary == "ergodic":
        return oracle_ergodic_nonlinear(s)
    return oracle_nonlinear(s)


def _sandwich_cases(quick: bool):
    names = ("lebesgue", "power:-0.5", "power:1") if quick else tuple(CATALOG)
    for name in names:
        for boundary in BOUNDARIES:
            yield name, 2.0, 2.0, boundary
    if quick:
        return
    for name in names:
        for p, q, boundary in ((3, 3, "dirichlet_left"), (2, 4, "dirichlet_right"),
                               (1.5, 3, "ergodic"), (2, 3, "ergodic")):
            yield name, float(p), float(q), boundary


def check_sandwich(quick: bool) -> _Tally:
    t = _Tally()
    for name, p, q, boundary in _sandwich_cases(quick):
        s = catalog_setup(name, p, q, boundary)
        rep = two_sided(s)
        if not rep.applicable:
            continue
        tag = f"{name} ({p:g},{q:g}) {boundary}"
        r = _oracle_for(s)
        a = r.A_estimate
        t.expect(rep.lower_A - SANDWICH_SLACK <= a <= rep.upper_A + SANDWICH_SLACK,
                 f"{tag}: oracle {a:.9g} outside [{rep.lower_A:.9g}, {rep.upper_A:.9g}]")
        if p == 2 and q == 2:
            t.expect(rep.upper_A / rep.lower_A <= 2 + 1e-9,
                     f"{tag}: upper/lower = {rep.upper_A / rep.lower_A:.12g} > 2")
    return t


def check_star_relation(quick: bool) -> _Tally:
    """B_* <= B* <= 2^(1/p - 1/q) B_*."""
    t = _Tally()
    names = ("lebesgue",) if quick else tuple(CATALOG)
    pqs = ((1.5, 3.0),) if quick else tuple(itertools.product((1.2, 1.5, 2.0), (2.0, 3.0, 6.0)))
    for name in names:
        for p, q in pqs:
            s = catalog_setup(name, p, q, "ergodic")
            hi, _ = b_star(s)
            lo, _ = b_substar(s)
            c = 2 ** (1 / p - 1 / q)
            tag = f"{name} ({p:g},{q:g})"
            t.expect(_rel_le(lo, hi, 1e-9), f"{tag}: B_* = {lo:.12g} exceeds B* = {hi:.12g}")
            t.expect(_rel_le(hi, c * lo, 1e-9), f"{tag}: B* = {hi:.12g} exceeds {c:.6g} B_* = {c * lo:.12g}")
    return t


def _chain_grid(quick: bool):
    if quick:
        return [(p, p + r) for p in (2.0, 3.0, 5.0) for r in (0.0, 1.0, 5.0)]
    return [(p, p + r) for p in P_GRID for r in R_GRID]


def make_chain_check(reading: str) -> Callable[[bool], _Tally]:
    def check_chain(quick: bool) -> _Tally:
        t = _Tally()
        for p, q in _chain_grid(quick):
            c = improvement_chain(p, q, reading)
            t.expect(c.ok, "; ".join(c.violations))
            if p == q:
                t.close(c.A_star, c.A_exact, 1e-10, f"A* vs A at p=q={p:g}", relative=False)
        return t
    return check_chain


def check_closed_form_b_plus(quick: bool) -> _Tally:
    t = _Tally()
    for p, q in _chain_grid(quick):
        got, _ = b_plus(catalog_setup("lebesgue", p, q, "dirichlet_left"))
        t.close(got, prop_B(p, q), REL_TOL, f"b_plus vs closed form at ({p:g},{q:g})")
        t.expect(got <= exact_A(p, q) * (1 + 1e-9) and exact_A(p, q) <= k_factor(Exponents(p, q)) * got * (1 + 1e-9),
                 f"exact A({p:g},{q:g}) outside [B+, k B+]")
    s = catalog_setup("lebesgue", 2, 2, "ergodic")
    t.close(kappa(s), 0.25, REL_TOL, "kappa on Lebesgue", relative=False)
    t.close(kappa0(s), 0.25, REL_TOL, "kappa0 on Lebesgue", relative=False)
    return t


def make_sweep_check(reading: str) -> Callable[[bool], _Tally]:
    def check_sweep_rows(quick: bool) -> _Tally:
        t = _Tally()
        step = 1.0 if quick else 0.25
        jobs = [sweep_points(diagonal=True, p_range=(1.05, 30.0), step=step),
                sweep_points(p=2.0, r_range=(0.01, 15.0), step=step),
                sweep_points(p=5.0, r_range=(0.01, 15.0), step=step)]
        for pts in jobs:
            for row in compute_rows(pts, reading):
                t.expect(not row.violations, "; ".join(row.violations))
                t.expect(all(math.isfinite(v) for v in row.values), f"non-finite value at ({row.p:g},{row.q:g})")
                if row.p == row.q:
                    t.close(row.values[3], row.values[2], 1e-10, f"A* vs A at p={row.p:g}", relative=False)
        return t
    return check_sweep_rows


def make_trend_check(reading: str) -> Callable[[bool], _Tally]:
    def check_sweep_trend(quick: bool) -> _Tally:
        t = _Tally()
        gaps = {}
        for p in (2.0, 5.0):
            c = improvement_chain(p, p + 10.0, reading)
            gaps[p] = (c.delta1 - c.delta1_bar) / c.A_exact
        t.expect(gaps[5.0] < gaps[2.0],
                 f"relative gap at r=10 is {gaps[5.0]:.6g} for p=5 and {gaps[2.0]:.6g} for p=2")
        return t
    return check_sweep_trend


_SCALED = (("b_plus", lambda s: b_plus(s)[0]), ("b_minus", lambda s: b_minus(s)[0]),
           ("b_star", lambda s: b_star(s)[0]), ("b_substar", lambda s: b_substar(s)[0]))


def check_scaling(quick: bool) -> _Tally:
    t = _Tally()
    names = ("lebesgue", "power:1") if quick else tuple(CATALOG)
    pqs = ((2.0, 2.0),) if quick else ((2.0, 2.0), (1.5, 3.0))
    for name in names:
        for p, q in pqs:
            s = catalog_setup(name, p, q, "ergodic")
            base = {k: f(s) for k, f in _SCALED}
            for c in (0.5, 4.0):
                sm, sn = scale_mu(s, c), scale_nu(s, c)
                for k, f in _SCALED:
                    tag = f"{k} {name} ({p:g},{q:g}) c={c:g}"
                    t.close(f(sm), c ** (1 / q) * base[k], REL_TOL, "mu-scaled " + tag)
                    t.close(f(sn), c ** (-1 / p) * base[k], REL_TOL, "nu-scaled " + tag)
    return t


def check_duality(quick: bool) -> _Tally:
    """kappa0 of (mu, nu_hat) equals kappa of the exchanged pair."""
    t = _Tally()
    for name in ("lebesgue", "power:-0.5"):
        s = catalog_setup(name, 2, 2, "dirichlet_both")
        t.close(kappa(swap_for_duality(s)), kappa0(s), REL_TOL, f"kappa/kappa0 exchange on {name}")
    return t


def check_theta_invariance(quick: bool) -> _Tally:
    t = _Tally()
    cases = [("1", "-x", Interval(-math.inf, math.inf), (0.0, 1.0, -2.0)),
             ("1", "0", Interval(0.0, 1.0), (0.25, 0.5))]
    if not quick:
        cases.append(("1 + x^2", "-2*x", Interval(-math.inf, math.inf), (0.0, 0.5)))
    for a, b, iv, thetas in cases:
        vals = []
        for th in thetas:
            mu, nu, nu_hat = measures_from_elliptic(EllipticCoefficients(a, b, th), iv)
            vals.append(kappa(HardySetup(iv, mu, nu, nu_hat, Exponents(2.0, 2.0))))
        for th, v in zip(thetas[1:], vals[1:]):
            t.close(v, vals[0], REL_TOL, f"kappa for a={a}, b={b}: theta={th:g} vs theta={thetas[0]:g}")
    return t


def check_oracle_agreement(quick: bool) -> _Tally:
    """Linear eigen-solver and nonlinear ascent agree at p = q = 2."""
    t = _Tally()
    names = ("lebesgue",) if quick else tuple(CATALOG)
    for name in names:
        s = catalog_setup(name, 2, 2, "ergodic")
        lin = oracle_linear(s, n=1024)
        non = oracle_ergodic_nonlinear(s, n=1024)
        t.close(non.A_estimate, lin.A_estimate, 1e-3, f"ergodic oracles on {name}")
    return t


# Driver ------------------------------------------------------------------------


def _checks(reading: str):
    return [
        ("exact_regression", check_exact_regression, True),
        ("oracle_reproduction", check_oracle_reproduction, True),
        ("closed_form_bounds", check_closed_form_bounds, True),
        ("sandwich", check_sandwich, True),
        ("star_relation", check_star_relation, True),
        ("improvement_chain", make_chain_check(reading), True),
        ("closed_form_b_plus", check_closed_form_b_plus, True),
        ("sweep_rows", make_sweep_check(reading), True),
        ("sweep_trend", make_trend_check(reading), False),
        ("scaling_covariance", check_scaling, True),
        ("duality_exchange", check_duality, True),
        ("theta_invariance", check_theta_invariance, True),
        ("oracle_agreement", check_oracle_agreement, True),
    ]


def check_names() -> list:
    return [name for name, _, _ in _checks(DEFAULT_READING)]


def run_verify(quick: bool = False, reading: str = DEFAULT_READING,
               only: Optional[Sequence[str]] = None,
               _fault_upper_scale: Optional[float] = None,
               progress: Optional[Callable[[CheckResult], None]] = None) -> VerifyReport:
    """Run the invariant suite; ``quick`` runs a reduced grid of every check."""
    report = VerifyReport()
    saved = _bounds._FAULT_UPPER_SCALE
    if _fault_upper_scale is not None:
        _bounds._FAULT_UPPER_SCALE = float(_fault_upper_scale)
    try:
        for name, fn, hard in _checks(reading):
            if only and name not in only:
                continue
            start = time.perf_counter()
            try:
                passed, detail = fn(quick).result()
            except (ArithmeticError, ValueError, OracleError, RuntimeError) as exc:
                passed, detail = False, f"{type(exc).__name__}: {exc}"
            res = CheckResult(name, passed, detail, hard, time.perf_counter() - start)
            if not res.passed and not hard:
                log.warning("soft check %s: %s", name, detail)
            report.results.append(res)
            if progress is not None:
                progress(res)
    finally:
        _bounds._FAULT_UPPER_SCALE = saved
    return report
