"""Density-based measures on an interval, dual measures and elliptic coefficients."""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np

from . import expr as _expr
from .quadrature import GL_NODES, GL_WEIGHTS, PanelTable, Transform, endpoint_transform

__all__ = [
    "Interval",
    "MeasureError",
    "WeightedMeasure",
    "EllipticCoefficients",
    "cumulative",
    "dual_measure",
    "measures_from_elliptic",
    "catalog_density",
    "density_from_source",
    "endpoint_transform",
]

log = logging.getLogger(__name__)

Density = Callable[[np.ndarray], np.ndarray]

# Points sampled at construction to validate a density before any quadrature.
_CHECK_POINTS = 257
# Unconverged panels are only worth a warning above this relative error.
WARN_RELATIVE_ERROR = 1e-6
TINY = np.finfo(float).tiny


class MeasureError(ValueError):
    pass


@dataclass(frozen=True)
class Interval:
    left: float
    right: float

    def __post_init__(self):
        if not (self.left < self.right):
            raise ValueError(f"interval needs left < right, got ({self.left}, {self.right})")
        if math.isnan(self.left) or math.isnan(self.right):
            raise ValueError("interval endpoints must not be NaN")

    @classmethod
    def parse(cls, text: str) -> "Interval":
        """Parse ``"a,b"``; ``-inf``/``inf`` are accepted for the endpoints."""
        parts = [s.strip() for s in text.split(",")]
        if len(parts) != 2:
            raise ValueError(f"interval must look like 'a,b', got {text!r}")
        return cls(float(parts[0]), float(parts[1]))

    def contains(self, x: float) -> bool:
        return self.left < x < self.right

    def reflected(self) -> "Interval":
        return Interval(-self.right, -self.left)

    def __str__(self):
        return f"({self.left:g}, {self.right:g})"


def _interior_sample(transform: Transform, n: int = _CHECK_POINTS) -> np.ndarray:
    t = np.linspace(transform.t_lo, transform.t_hi, n + 2)[1:-1]
    return transform.to_x(t)


class WeightedMeasure:
    """Measure ``density(x) dx`` on an interval.

    The cumulative table is built on first use under a lock and never changes
    afterwards, so concurrent readers see identical results.
    """

    absolutely_continuous = True

    def __init__(self, interval: Interval, density: Density, label: str = "", check: bool = True):
        self.interval = interval
        self.density = density
        self.label = label or "density"
        self.transform = endpoint_transform(interval.left, interval.right)
        self._table: Optional[PanelTable] = None
        self._lock = threading.Lock()
        if check:
            x = _interior_sample(self.transform)
            with np.errstate(all="ignore"):
                d = np.asarray(density(x), dtype=float)
            bad = d < 0
            if np.any(bad):
                raise MeasureError(f"negative density {d[bad][0]:g} at x={x[bad][0]:g} for {self.label}")
            if np.any(np.isnan(d)):
                raise MeasureError(f"density {self.label} is undefined at x={x[np.isnan(d)][0]:g}")

    def __repr__(self):
        return f"WeightedMeasure({self.label!r} on {self.interval})"

    def integrand(self, t):
        x = self.transform.to_x(t)
        with np.errstate(all="ignore"):
            d = np.asarray(self.density(x), dtype=float)
            if np.any(d < 0) or np.any(np.isnan(d)):
                bad = (d < 0) | np.isnan(d)
                raise MeasureError(f"density {self.label} is negative or undefined at x={x[bad][0]!r}")
            out = d * self.transform.dx_dt(t)
        # 0 * inf from an underflowed density at a far node contributes nothing.
        return np.where(d == 0, 0.0, out)

    @property
    def table(self) -> PanelTable:
        if self._table is None:
            with self._lock:
                if self._table is None:
                    tab = PanelTable(self.integrand, self.transform.t_lo, self.transform.t_hi)
                    _report_unconverged(self.label, tab)
                    self._table = tab
        return self._table

    # Queries in the reference coordinate t.
    def mass_t(self, ta, tb):
        with np.errstate(all="ignore"):
            return self.table.integral(ta, tb)

    def left_t(self, t):
        return self.mass_t(self.transform.t_lo, t)

    def right_t(self, t):
        return self.mass_t(t, self.transform.t_hi)

    def to_t(self, x):
        t = self.transform.to_t(x)
        return np.clip(t, self.transform.t_lo, self.transform.t_hi)

    @property
    def total_mass(self) -> float:
        return self.table.total()

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.total_mass)

    def cumulative(self, a, b):
        """μ(a, b) for a <= b in the closed interval; +inf when it diverges."""
        a_arr, b_arr = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        if np.any(a_arr > b_arr):
            raise ValueError("cumulative needs a <= b")
        lo, hi = self.interval.left, self.interval.right
        if np.any(a_arr < lo) or np.any(b_arr > hi):
            raise ValueError(f"cumulative bounds outside {self.interval}")
        out = self.mass_t(self.to_t(a_arr), self.to_t(b_arr))
        out = np.where(a_arr == b_arr, 0.0, out)
        return float(out) if np.ndim(out) == 0 else out

    def scaled(self, c: float) -> "WeightedMeasure":
        dens = self.density
        return WeightedMeasure(self.interval, lambda x: c * dens(x), f"{c:g}*{self.label}")

    def reflected(self) -> "WeightedMeasure":
        dens = self.density
        return WeightedMeasure(self.interval.reflected(), lambda x: dens(-x), f"reflect({self.label})")


def _report_unconverged(label: str, tab: PanelTable):
    """Log interior panels that stopped refining before meeting the tolerance."""
    if not tab.unconverged_interior:
        return
    level = logging.WARNING if tab.achieved_error > WARN_RELATIVE_ERROR else logging.DEBUG
    log.log(
        level,
        "%s: %d interior panels stopped refining at the resolution, depth or noise limit "
        "(worst relative panel error %.3g)",
        label, tab.unconverged_interior, tab.achieved_error,
    )


def cumulative(m: WeightedMeasure, a: float, b: float) -> float:
    return m.cumulative(a, b)


def dual_measure(nu: WeightedMeasure, p: float) -> WeightedMeasure:
    """Measure with density v(x)^(-1/(p-1)) where v is the density of ``nu``."""
    if not p > 1:
        raise ValueError(f"dual measure needs p > 1, got {p}")
    dens = nu.density
    power = -1.0 / (p - 1.0)

    def dual(x):
        d = np.asarray(dens(x), dtype=float)
        # Subnormal densities carry too few digits for a negative power.
        d = np.where(np.abs(d) < TINY, 0.0, d)
        with np.errstate(divide="ignore", over="ignore"):
            return np.power(d, power)

    return WeightedMeasure(nu.interval, dual, f"dual_{p:g}({nu.label})")


def catalog_density(name: str) -> Density:
    """Built-in densities: ``lebesgue``, ``power:alpha``, ``gauss``."""
    if name == "lebesgue":
        return lambda x: np.ones_like(np.asarray(x, dtype=float))
    if name == "gauss":
        return lambda x: np.exp(-0.5 * np.square(x))
    if name.startswith("power:"):
        alpha = float(name.split(":", 1)[1])
        return lambda x: np.power(np.asarray(x, dtype=float), alpha)
    raise KeyError(name)


def density_from_source(source: str) -> Tuple[Density, str]:
    """Catalog name or expression string -> vectorised density."""
    try:
        return catalog_density(source), source
    except (KeyError, ValueError):
        pass
    tree = _expr.parse(source)
    return (lambda x: _expr.evaluate(tree, x)), _expr.to_string(tree)


def _as_function(e: Union[str, _expr.Expression, Callable, float]) -> Callable:
    if isinstance(e, (int, float)):
        c = float(e)
        return lambda x: np.full(np.shape(x), c)
    if isinstance(e, str):
        e = _expr.parse(e)
    if isinstance(e, (_expr.Num, _expr.Var, _expr.Neg, _expr.BinOp, _expr.Call)):
        tree = e
        return lambda x: _expr.evaluate(tree, x)
    return e


@dataclass(frozen=True)
class EllipticCoefficients:
    """Operator a(x) d²/dx² + b(x) d/dx with reference point theta."""

    a: object
    b: object
    theta: float


class Potential:
    """C(x) = ∫_θ^x b/a, cached as a signed panel table."""

    def __init__(self, coef: EllipticCoefficients, interval: Interval):
        if not interval.contains(coef.theta):
            raise MeasureError(f"theta={coef.theta} is not inside {interval}")
        self.a = _as_function(coef.a)
        self.b = _as_function(coef.b)
        self.transform = endpoint_transform(interval.left, interval.right)
        x = _interior_sample(self.transform)
        with np.errstate(all="ignore"):
            av = np.asarray(self.a(x), dtype=float)
        if np.any(~(av > 0)):
            bad = ~(av > 0)
            raise MeasureError(f"diffusion coefficient a(x) must be > 0; a({x[bad][0]:g}) = {av[bad][0]:g}")
        self.theta = coef.theta
        self.t_theta = float(self.transform.to_t(coef.theta))
        self.table = PanelTable(self._integrand, self.transform.t_lo, self.transform.t_hi)
        _report_unconverged("potential C(x)", self.table)
        # C at every panel break, so a query only needs one local correction.
        br = self.table.breaks
        lo = np.minimum(br, self.t_theta)
        hi = np.maximum(br, self.t_theta)
        val = self.table.integral(lo, hi)
        self._c_breaks = np.where(br >= self.t_theta, val, -val)
        self._x_breaks = self.transform.to_x(br)

    def _integrand(self, t):
        x = self.transform.to_x(t)
        with np.errstate(all="ignore"):
            av = np.asarray(self.a(x), dtype=float)
            if np.any(av <= 0):
                raise MeasureError(f"diffusion coefficient a(x) <= 0 at x={x[av <= 0][0]!r}")
            out = np.asarray(self.b(x), dtype=float) / av * self.transform.dx_dt(t)
        return out

    def _ratio(self, x):
        with np.errstate(all="ignore"):
            return np.asarray(self.b(x), dtype=float) / np.asarray(self.a(x), dtype=float)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        t = self.transform.to_t(x)
        k = self.table._locate(t)
        # Correct from the nearer finite break of the panel, in x directly.
        xl, xr = self._x_breaks[k], self._x_breaks[k + 1]
        with np.errstate(all="ignore"):
            use_right = ~np.isfinite(xl) | (np.isfinite(xr) & (xr - x < x - xl))
            xb = np.where(use_right, xr, xl)
            cb = np.where(use_right, self._c_breaks[k + 1], self._c_breaks[k])
            half = 0.5 * (x - xb)
            nodes = (0.5 * (x + xb))[..., None] + half[..., None] * GL_NODES
            corr = half * (self._ratio(nodes) @ GL_WEIGHTS)
            out = cb + np.where(half == 0, 0.0, corr)
        # Nodes that round onto an infinite end take the tabulated end value.
        out = np.where(np.isposinf(x), self._c_breaks[-1], out)
        return np.where(np.isneginf(x), self._c_breaks[0], out)


def measures_from_elliptic(
    coef: EllipticCoefficients, interval: Interval
) -> Tuple[WeightedMeasure, WeightedMeasure, WeightedMeasure]:
    """(μ, ν, ν̂) with densities e^C/a, e^C and e^-C."""
    pot = Potential(coef, interval)
    a = pot.a

    def mu(x):
        with np.errstate(all="ignore"):
            return np.exp(pot(x)) / np.asarray(a(x), dtype=float)

    def nu(x):
        with np.errstate(over="ignore"):
            return np.exp(pot(x))

    def nu_hat(x):
        with np.errstate(over="ignore"):
            return np.exp(-pot(x))

    tag = f"elliptic(theta={coef.theta:g})"
    return (
        WeightedMeasure(interval, mu, f"mu[{tag}]"),
        WeightedMeasure(interval, nu, f"nu[{tag}]"),
        WeightedMeasure(interval, nu_hat, f"nu_hat[{tag}]"),
    )
