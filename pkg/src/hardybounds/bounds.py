"""Isoperimetric constants and two-sided estimates of the optimal Hardy constant A.

All suprema are taken in the reference coordinate of the endpoint transform
and reported back in x. Extended arithmetic follows the limit conventions
0^(negative) = +inf, s + inf = inf, c / inf = 0, with indeterminate
``inf * 0`` read as 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from .measure import Interval, MeasureError, WeightedMeasure, dual_measure
from .optimize import sup_1d, sup_2d
from .special import Exponents, k_factor

__all__ = [
    "BOUNDARIES",
    "SetupError",
    "HardySetup",
    "BoundsReport",
    "b_plus",
    "b_minus",
    "b_star",
    "b_substar",
    "kappa",
    "kappa0",
    "split_bounds",
    "balanced_theta",
    "two_sided",
    "reflect",
    "swap_for_duality",
    "scale_mu",
    "scale_nu",
]

BOUNDARIES = ("ergodic", "dirichlet_left", "dirichlet_right", "dirichlet_both")
# Test hook for negative controls: scales every reported upper estimate.
_FAULT_UPPER_SCALE = 1.0
_MIRROR = {"dirichlet_left": "dirichlet_right", "dirichlet_right": "dirichlet_left"}


class SetupError(ValueError):
    """A hypothesis of the estimates does not hold for the given setup."""


@dataclass(frozen=True)
class HardySetup:
    interval: Interval
    mu: WeightedMeasure
    nu: WeightedMeasure
    nu_hat: WeightedMeasure
    exponents: Exponents
    boundary: str = "ergodic"

    def __post_init__(self):
        if self.boundary not in BOUNDARIES:
            raise SetupError(f"unknown boundary kind {self.boundary!r}; expected one of {BOUNDARIES}")
        for m in (self.mu, self.nu, self.nu_hat):
            if m.interval != self.interval:
                raise SetupError(f"{m.label} lives on {m.interval}, setup interval is {self.interval}")
        if self.boundary == "ergodic" and not self.mu.is_finite:
            raise SetupError("the ergodic case needs a finite total mass of mu")

    @classmethod
    def build(cls, mu: WeightedMeasure, nu: WeightedMeasure, p: float, q: float,
              boundary: str = "ergodic") -> "HardySetup":
        """Setup with nu_hat derived from nu and p."""
        return cls(mu.interval, mu, nu, dual_measure(nu, p), Exponents(p, q), boundary)

    @property
    def p(self) -> float:
        return self.exponents.p

    @property
    def q(self) -> float:
        return self.exponents.q

    @property
    def transform(self):
        return self.mu.transform


def reflect(s: HardySetup) -> HardySetup:
    """Mirror image under x -> -x; one-sided Dirichlet conditions swap ends."""
    return HardySetup(
        s.interval.reflected(),
        s.mu.reflected(),
        s.nu.reflected(),
        s.nu_hat.reflected(),
        s.exponents,
        _MIRROR.get(s.boundary, s.boundary),
    )


def swap_for_duality(s: HardySetup, boundary: str = "ergodic") -> HardySetup:
    """Setup with the roles of mu and nu_hat exchanged (p = q = 2)."""
    if not (s.p == 2 and s.q == 2):
        raise SetupError("the mu <-> nu_hat exchange is defined for p = q = 2")
    dens = s.mu.density

    def inv(x):
        with np.errstate(divide="ignore"):
            return 1.0 / np.asarray(dens(x), dtype=float)

    nu = WeightedMeasure(s.interval, inv, f"1/({s.mu.label})")
    return HardySetup(s.interval, s.nu_hat, nu, s.mu, s.exponents, boundary)


def scale_mu(s: HardySetup, c: float) -> HardySetup:
    return replace(s, mu=s.mu.scaled(c))


def scale_nu(s: HardySetup, c: float) -> HardySetup:
    nu = s.nu.scaled(c)
    return replace(s, nu=nu, nu_hat=dual_measure(nu, s.p))


def _pow(m, e):
    """m**e with 0**(negative) = inf and inf**(negative) = 0."""
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        return np.power(m, e)


_BIG = np.finfo(float).max


def _mass(m: WeightedMeasure, ta, tb):
    """m(ta, tb) in t and a mask of masses beyond the float range.

    A mass is genuinely infinite only when the range reaches an end where the
    measure diverges. Any other inf comes from a density beyond the float
    range; it is replaced by the largest float, which is a lower bound.
    """
    v = m.mass_t(ta, tb)
    tab = m.table
    genuine = (tab.left_divergent & (np.asarray(ta) <= tab.t_lo)) | (tab.right_divergent & (np.asarray(tb) >= tab.t_hi))
    over = np.isinf(v) & ~genuine
    return np.where(over, _BIG, v), over


def _settle(value: float, overflowed: bool) -> float:
    """A supremum attained where a numerator mass overflowed exceeds every float."""
    return math.inf if overflowed and value > 0 else value


# One-point constants ---------------------------------------------------------


def _one_point(inner_left: bool, s: HardySetup, lo: float, hi: float, anchor: Optional[float] = None):
    """sup_t nu_hat(side)^{1/p*} mu(other side)^{1/q} on (lo, hi) in t.

    ``inner_left`` selects nu_hat over (anchor, t) with mu over (t, right end);
    otherwise nu_hat over (t, anchor) with mu over (left end, t).
    Returns (value, t).
    """
    a1, a2 = 1.0 / s.exponents.p_star, 1.0 / s.q
    tr = s.transform

    def masses(t):
        if inner_left:
            nh = _mass(s.nu_hat, tr.t_lo if anchor is None else anchor, t)
            m = _mass(s.mu, t, tr.t_hi)
        else:
            nh = _mass(s.nu_hat, t, tr.t_hi if anchor is None else anchor)
            m = _mass(s.mu, tr.t_lo, t)
        return nh, m

    def f(t):
        (nh, _), (m, _) = masses(t)
        with np.errstate(invalid="ignore", over="ignore"):
            return _pow(nh, a1) * _pow(m, a2)

    r = sup_1d(f, lo, hi)
    (_, o1), (_, o2) = masses(np.array([r.t]))
    return _settle(r.value, bool(o1[0] or o2[0])), r.t


def b_plus(s: HardySetup) -> Tuple[float, float]:
    """B+ = sup_y nu_hat(-M, y)^{1/p*} mu(y, N)^{1/q}; returns (value, argmax y)."""
    tr = s.transform
    value, t = _one_point(True, s, tr.t_lo, tr.t_hi)
    return value, float(tr.to_x(t))


def b_minus(s: HardySetup) -> Tuple[float, float]:
    """B- = sup_x nu_hat(x, N)^{1/p*} mu(-M, x)^{1/q}, computed as B+ of the mirror image."""
    value, y = b_plus(reflect(s))
    return value, -y


def split_bounds(s: HardySetup, theta: float) -> Tuple[float, float]:
    """(B_theta^-, B_theta^+) for the two halves joined at theta with f(theta) = 0."""
    if not s.interval.contains(theta):
        raise SetupError(f"theta={theta} is not inside {s.interval}")
    tr = s.transform
    tt = float(tr.to_t(theta))
    lower = _one_point(False, s, tr.t_lo, tt, anchor=tt)
    upper = _one_point(True, s, tt, tr.t_hi, anchor=tt)
    return lower[0], upper[0]


def balanced_theta(s: HardySetup, tol: float = 1e-10, max_iter: int = 200) -> float:
    """Bisection for the point where B_theta^- = B_theta^+."""
    tr = s.transform
    lo, hi = tr.t_lo, tr.t_hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol or mid in (lo, hi):
            break
        bm, bp = split_bounds(s, float(tr.to_x(mid)))
        if bm < bp:
            lo = mid
        else:
            hi = mid
    return float(tr.to_x(0.5 * (lo + hi)))


# Two-point constants ---------------------------------------------------------


def _two_point(s: HardySetup, inner: WeightedMeasure, outer: WeightedMeasure,
               a: float, b: float, c: float):
    """sup_{x<=y} inner(x,y)^a / (outer(-M,x)^b + outer(y,N)^b)^c."""
    tr = s.transform

    def f(tx, ty):
        num = _pow(_mass(inner, tx, ty)[0], a)
        den = _pow(_pow(_mass(outer, tr.t_lo, tx)[0], b) + _pow(_mass(outer, ty, tr.t_hi)[0], b), c)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return num / den

    r = sup_2d(f, tr.t_lo, tr.t_hi)
    # Outer masses enter with negative powers, so only the numerator can hide growth.
    over = _mass(inner, np.array([r.tx]), np.array([r.ty]))[1]
    return _settle(r.value, bool(over[0])), (float(tr.to_x(r.tx)), float(tr.to_x(r.ty)))


def _require_finite_mu(s: HardySetup, name: str):
    if not s.mu.is_finite:
        raise SetupError(f"{name} needs mu(-M, N) < inf")


def b_star(s: HardySetup) -> Tuple[float, Tuple[float, float]]:
    """B* (the constant behind the ergodic upper estimate)."""
    _require_finite_mu(s, "B*")
    p, q = s.p, s.q
    return _two_point(s, s.nu_hat, s.mu, (p - 1) / p, p / (q * (1 - p)), (p - 1) / p)


def b_substar(s: HardySetup) -> Tuple[float, Tuple[float, float]]:
    """B_* (the constant behind the ergodic lower estimate)."""
    _require_finite_mu(s, "B_*")
    p, q = s.p, s.q
    if p == q:
        # Identical formula on the diagonal; share the computation.
        return b_star(s)
    return _two_point(s, s.nu_hat, s.mu, (p - 1) / p, 1 / (1 - q), (q - 1) / q)


def _require_22(s: HardySetup, name: str):
    if not (s.p == 2 and s.q == 2):
        raise SetupError(f"{name} is defined for p = q = 2, got p={s.p:g}, q={s.q:g}")


def kappa(s: HardySetup) -> float:
    """kappa with kappa^-2 = inf [mu(-M,x)^-1 + mu(y,N)^-1] / nu_hat(x,y)."""
    _require_22(s, "kappa")
    _require_finite_mu(s, "kappa")
    return _two_point(s, s.nu_hat, s.mu, 0.5, -1.0, 0.5)[0]


def kappa0(s: HardySetup) -> float:
    """kappa_0 for Dirichlet conditions at both ends (mu and nu_hat exchanged)."""
    _require_22(s, "kappa0")
    return _two_point(s, s.mu, s.nu_hat, 0.5, -1.0, 0.5)[0]


# Assembly --------------------------------------------------------------------


@dataclass
class BoundsReport:
    boundary: str
    p: float
    q: float
    b_plus: Optional[float] = None
    b_minus: Optional[float] = None
    b_star: Optional[float] = None
    b_substar: Optional[float] = None
    kappa_or_none: Optional[float] = None
    lower_A: Optional[float] = None
    upper_A: Optional[float] = None
    factor_used: Optional[float] = None
    argmax_points: Dict[str, tuple] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def applicable(self) -> bool:
        """True when both a finite positive lower and a finite upper estimate exist."""
        return (
            self.lower_A is not None and self.upper_A is not None
            and 0 < self.lower_A and math.isfinite(self.upper_A)
        )

    @property
    def ratio_limit(self) -> Optional[float]:
        """Largest upper/lower ratio the estimates allow for this report."""
        if self.factor_used is None:
            return None
        if self.boundary == "ergodic" and not (self.p == 2 and self.q == 2):
            return self.factor_used * 2 ** (1 / self.p - 1 / self.q)
        return self.factor_used

    def lines(self) -> List[str]:
        out = [f"boundary: {self.boundary}   p = {self.p:g}   q = {self.q:g}"]
        for name in ("b_plus", "b_minus", "b_star", "b_substar", "kappa_or_none"):
            v = getattr(self, name)
            if v is not None:
                where = self.argmax_points.get(name)
                loc = "" if where is None else "   at " + ", ".join(f"{w:.10g}" for w in where)
                out.append(f"{name:>14}: {v:.12g}{loc}")
        for name in ("lower_A", "upper_A", "factor_used"):
            v = getattr(self, name)
            out.append(f"{name:>14}: " + ("absent" if v is None else f"{v:.12g}"))
        out.extend(f"note: {n}" for n in self.notes)
        return out


def _fill_one_point(s: HardySetup, rep: BoundsReport):
    rep.b_plus, y = b_plus(s)
    rep.argmax_points["b_plus"] = (y,)
    rep.b_minus, x = b_minus(s)
    rep.argmax_points["b_minus"] = (x,)


def two_sided(s: HardySetup) -> BoundsReport:
    """Lower and upper estimates of A for the setup's boundary kind."""
    p, q = s.p, s.q
    rep = BoundsReport(s.boundary, p, q)
    _fill_one_point(s, rep)
    if s.mu.is_finite:
        rep.b_star, xy = b_star(s)
        rep.argmax_points["b_star"] = xy
        rep.b_substar, xy = b_substar(s)
        rep.argmax_points["b_substar"] = xy

    if s.boundary == "ergodic":
        if p == 2 and q == 2:
            rep.kappa_or_none = kappa(s)
            rep.argmax_points["kappa_or_none"] = rep.argmax_points["b_star"]
            rep.lower_A, rep.upper_A, rep.factor_used = rep.kappa_or_none, 2 * rep.kappa_or_none, 2.0
        else:
            rep.lower_A = rep.b_substar
            if 1 < p <= 2 <= q:
                rep.factor_used = k_factor(Exponents(p, 2.0))
                rep.upper_A = rep.factor_used * rep.b_star
            else:
                rep.notes.append(
                    "no certified upper bound: the ergodic upper estimate needs 1 < p <= 2 <= q"
                )
    elif s.boundary in ("dirichlet_left", "dirichlet_right"):
        lower = rep.b_plus if s.boundary == "dirichlet_left" else rep.b_minus
        rep.lower_A = lower
        if q >= p:
            rep.factor_used = k_factor(s.exponents)
            rep.upper_A = rep.factor_used * lower
        else:
            rep.notes.append("no upper bound: the one-sided estimate A <= k_{q,p} B needs q >= p")
    else:
        if p == 2 and q == 2:
            rep.kappa_or_none = kappa0(s)
            rep.lower_A, rep.upper_A, rep.factor_used = rep.kappa_or_none, 2 * rep.kappa_or_none, 2.0
        else:
            rep.notes.append("the two-sided Dirichlet estimate is only available for p = q = 2")

    if rep.lower_A is not None and not math.isfinite(rep.lower_A):
        rep.notes.append("the lower estimate is infinite, so no finite constant A exists for this setup")
    if rep.lower_A == 0:
        rep.notes.append("the lower estimate vanishes (degenerate measures)")
    if rep.upper_A is not None and _FAULT_UPPER_SCALE != 1.0:
        rep.upper_A *= _FAULT_UPPER_SCALE
    return rep
