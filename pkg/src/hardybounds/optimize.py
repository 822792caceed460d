"""Grid-then-golden-section maximisers for one and two cut points.

Objectives are evaluated in the bounded reference coordinate t of the
endpoint transform. They must accept numpy arrays; NaN values (the
indeterminate ``inf * 0`` cases) are read as 0 and +inf is a legitimate
supremum.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

log = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

GRID_1D = 257
GRID_2D = 129
EDGE_MARGIN = 1e-12
# Extra points that approach each edge geometrically, so suprema attained in
# a boundary layer are not missed by a uniform grid.
EDGE_PROBES = tuple(10.0 ** -k for k in range(3, 12))


def _clean(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.where(np.isnan(v), 0.0, v)


def golden_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10) -> Tuple[float, float]:
    """Maximise a scalar function on [a, b]; returns (argmax, value).

    Both end points are also compared, so a maximum on the bracket edge is
    reported exactly rather than approached from inside.
    """
    fa, fb = f(a), f(b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    lo, hi = a, b
    while hi - lo > tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)
    best = max((fc, c), (fd, d), (fa, a), (fb, b), key=lambda p: (p[0], -p[1]))
    return best[1], best[0]


def reference_grid(lo: float, hi: float, n: int, margin: float = EDGE_MARGIN) -> np.ndarray:
    """Sorted grid on [lo, hi] shrunk by a relative margin, with edge probes."""
    w = hi - lo
    a, b = lo + margin * w, hi - margin * w
    pts = [np.linspace(a, b, n)]
    probes = np.asarray(EDGE_PROBES) * w
    pts.append(lo + probes)
    pts.append(hi - probes)
    g = np.unique(np.concatenate(pts))
    return g[(g >= a) & (g <= b)]


@dataclass(frozen=True)
class Sup1D:
    value: float
    t: float


@dataclass(frozen=True)
class Sup2D:
    value: float
    tx: float
    ty: float
    spread: float = 0.0  # disagreement between the refined starts


def sup_1d(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
           n: int = GRID_1D, tol: float = 1e-10) -> Sup1D:
    """Supremum of ``f`` on the open range (lo, hi)."""
    grid = reference_grid(lo, hi, n)
    vals = _clean(f(grid))
    if np.any(np.isposinf(vals)):
        i = int(np.argmax(np.isposinf(vals)))
        return Sup1D(math.inf, float(grid[i]))
    i = int(np.argmax(vals))
    if vals[i] <= 0:
        return Sup1D(0.0, float(grid[i]))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, len(grid) - 1)]

    def g(t):
        return float(_clean(f(np.array([t])))[0])

    t, v = golden_max(g, float(a), float(b), tol * max(1.0, hi - lo))
    if v < vals[i]:
        t, v = float(grid[i]), float(vals[i])
    return Sup1D(float(v), float(t))


def sup_2d(f: Callable[[np.ndarray, np.ndarray], np.ndarray], lo: float, hi: float,
           n: int = GRID_2D, starts: int = 3, tol: float = 1e-10, max_sweeps: int = 200) -> Sup2D:
    """Supremum of ``f(tx, ty)`` over lo < tx <= ty < hi.

    A triangular coarse grid is scanned, then coordinate-wise golden-section
    refinement runs from the best ``starts`` cells. Near ties resolve to the
    lexicographically smallest point.
    """
    grid = reference_grid(lo, hi, n)
    ii, jj = np.triu_indices(len(grid))
    vals = _clean(f(grid[ii], grid[jj]))
    if np.any(np.isposinf(vals)):
        k = int(np.argmax(np.isposinf(vals)))
        return Sup2D(math.inf, float(grid[ii[k]]), float(grid[jj[k]]))
    order = np.argsort(-vals, kind="stable")
    if vals[order[0]] <= 0:
        k = int(order[0])
        return Sup2D(0.0, float(grid[ii[k]]), float(grid[jj[k]]))

    def g(x, y):
        return float(_clean(f(np.array([x]), np.array([y])))[0])

    a_min, b_max = float(grid[0]), float(grid[-1])
    floor = 1e-6 * (hi - lo)
    results = []
    for k in order[:starts]:
        i, j = int(ii[k]), int(jj[k])
        x, y, v = float(grid[i]), float(grid[j]), float(vals[k])
        hx = float(grid[min(i + 1, len(grid) - 1)] - grid[max(i - 1, 0)])
        hy = float(grid[min(j + 1, len(grid) - 1)] - grid[max(j - 1, 0)])
        for sweep in range(max_sweeps):
            x0, y0, v0 = x, y, v
            nx, vx = golden_max(lambda s: g(s, y), max(a_min, x - hx), min(y, x + hx), tol)
            if vx >= v:
                x, v = nx, vx
            ny, vy = golden_max(lambda s: g(x, s), max(x, y - hy), min(b_max, y + hy), tol)
            if vy >= v:
                y, v = ny, vy
            dx, dy = abs(x - x0), abs(y - y0)
            # Positions are only resolvable to about sqrt(eps) on a flat top,
            # so a sweep with no gain in value also ends the refinement.
            if math.hypot(dx, dy) < tol or (sweep > 0 and v - v0 <= 1e-15 * abs(v)):
                break
            hx, hy = max(4 * dx, floor), max(4 * dy, floor)
        results.append((v, x, y))
    best_v = max(r[0] for r in results)
    close = [r for r in results if r[0] >= best_v * (1 - 1e-12)]
    v, x, y = min(close, key=lambda r: (r[1], r[2]))
    spread = (best_v - min(r[0] for r in results)) / best_v
    if spread > 1e-8:
        log.info("two-point supremum: refined starts disagree by %.3g (objective not unimodal)", spread)
    return Sup2D(float(v), float(x), float(y), float(spread))
