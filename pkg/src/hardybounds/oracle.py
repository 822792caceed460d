"""Independent numerical estimates of the optimal constant A.

The interval is cut into cells of equal width in the reference coordinate of
the endpoint transform. Cell masses come from mu, and the weight of the link
between neighbouring cell centres is nu_hat of the segment joining them: by
Holder's inequality ``|f(c') - f(c)|^p / nu_hat(c, c')^(p-1)`` is the least
``int |f'|^p dnu`` over that segment, so the discrete problem is the exact
restriction of the continuous one to piecewise extremal profiles.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .bounds import HardySetup, reflect
from .special import conjugate

__all__ = ["OracleError", "OracleResult", "SEEDS", "oracle_linear", "oracle_nonlinear", "oracle_ergodic_nonlinear"]

log = logging.getLogger(__name__)

SEEDS = (12345, 23456, 34567)
# End cells lighter than this fraction of the total mass are dropped: they
# carry no weight in either norm but make the mass matrix numerically singular.
TRIM_FRACTION = 1e-24
# Gradient ascent stops after this many consecutive steps with a relative
# gain below ASCENT_QUIET * tol.
ASCENT_QUIET = 1e-2
ASCENT_QUIET_RUN = 20


class OracleError(RuntimeError):
    pass


@dataclass
class OracleResult:
    A_estimate: float
    method: str
    grid_size: int
    iterations: int
    residual: float
    converged: bool
    eigenvalue: Optional[float] = None
    rayleigh: Optional[float] = None
    lower_bound_only: bool = False
    notes: List[str] = field(default_factory=list)


# Discretisation --------------------------------------------------------------


@dataclass
class _Mesh:
    mass: np.ndarray   # mu of each kept cell
    link: np.ndarray   # nu_hat between consecutive kept centres
    left: float        # nu_hat from the left end to the first centre
    right: float       # nu_hat from the last centre to the right end
    trimmed: Tuple[int, int]


def _mesh(s: HardySetup, n: int) -> _Mesh:
    if n < 16:
        raise ValueError(f"grid size must be at least 16, got {n}")
    tr = s.transform
    edges = np.linspace(tr.t_lo, tr.t_hi, n + 1)
    centres = 0.5 * (edges[:-1] + edges[1:])
    mass = s.mu.mass_t(edges[:-1], edges[1:])
    if not np.all(np.isfinite(mass)):
        raise OracleError("a cell has infinite mu-mass; the oracle needs locally finite mu")
    total = mass.sum()
    if not total > 0:
        raise OracleError("mu has no mass on the interval")
    heavy = np.nonzero(mass > TRIM_FRACTION * total)[0]
    i0, i1 = int(heavy[0]), int(heavy[-1]) + 1
    if np.any(mass[i0:i1] <= 0):
        raise OracleError("mu vanishes on an interior cell; the mass matrix is singular")
    c = centres[i0:i1]
    link = s.nu_hat.mass_t(c[:-1], c[1:])
    if not np.all((link > 0) & np.isfinite(link)):
        raise OracleError("nu_hat is zero or infinite between neighbouring cells")
    left = float(s.nu_hat.mass_t(tr.t_lo, c[0]))
    right = float(s.nu_hat.mass_t(c[-1], tr.t_hi))
    return _Mesh(mass[i0:i1].copy(), link, left, right, (i0, n - i1))


def _dirichlet_ends(s: HardySetup, m: _Mesh, notes: List[str]) -> Tuple[bool, bool]:
    """Which ends are clamped once void conditions are dropped.

    nu_hat infinite next to a clamped end means the condition does not
    constrain f. With one clamped end constants become admissible and A is
    infinite; with both, the other end still carries the constraint.
    """
    left = s.boundary in ("dirichlet_left", "dirichlet_both")
    right = s.boundary in ("dirichlet_right", "dirichlet_both")
    void_left = left and math.isinf(m.left)
    void_right = right and math.isinf(m.right)
    if s.boundary == "dirichlet_both" and void_left != void_right:
        notes.append(f"the {'left' if void_left else 'right'} Dirichlet condition is void (nu_hat infinite there)")
        return not void_left, not void_right
    if void_left or void_right:
        raise OracleError("nu_hat is infinite next to a Dirichlet end, so the condition is void and A is infinite")
    return left, right


# Linear case p = q = 2 ----------------------------------------------------------


def _sturm_count(d: List[float], e2: List[float], x: float) -> int:
    """Number of eigenvalues of the tridiagonal matrix below x."""
    count = 0
    q = d[0] - x
    if q < 0:
        count += 1
    for i in range(1, len(d)):
        if q == 0.0:
            q = 1e-300
        q = d[i] - x - e2[i - 1] / q
        if q < 0:
            count += 1
    return count


def _bisect_eigenvalue(d, off, index: int, tol: float) -> Tuple[float, int, float]:
    """index-th smallest eigenvalue (0-based) by Sturm bisection in log scale."""
    dl, e2 = d.tolist(), (off * off).tolist()
    radius = np.abs(off)
    hi = float(np.max(d + np.concatenate([radius, [0.0]]) + np.concatenate([[0.0], radius])))
    hi = max(hi, 1e-300) * (1 + 1e-12)
    lo = 0.0
    it = 0
    while it < 4000:
        it += 1
        if lo > 0 and hi - lo <= tol * hi:
            break
        mid = math.sqrt(lo * hi) if lo > 0 and hi > 4 * lo else 0.5 * (lo + hi)
        if lo == 0.0:
            mid = hi * 2.0 ** -(it * 8) if hi * 2.0 ** -(it * 8) > 1e-300 else 0.5 * hi
        if _sturm_count(dl, e2, mid) > index:
            hi = mid
        else:
            lo = mid
        if lo == 0.0 and hi < 1e-290:
            break
    return 0.5 * (lo + hi), it, (hi - lo) / hi


def _tridiag_solve(a, b, c, r):
    """Thomas algorithm for sub-diagonal a, diagonal b, super-diagonal c."""
    n = len(b)
    cp = np.empty(n)
    dp = np.empty(n)
    cp[0] = c[0] / b[0] if n > 1 else 0.0
    dp[0] = r[0] / b[0]
    for i in range(1, n):
        den = b[i] - a[i - 1] * cp[i - 1]
        if den == 0.0:
            den = 1e-300
        cp[i] = c[i] / den if i < n - 1 else 0.0
        dp[i] = (r[i] - a[i - 1] * dp[i - 1]) / den
    x = np.empty(n)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def oracle_linear(s: HardySetup, n: int = 4096, tol: float = 1e-12) -> OracleResult:
    """A = lambda^(-1/2) from the discrete eigenproblem of the setup's boundary kind."""
    if not (s.p == 2 and s.q == 2):
        raise ValueError("oracle_linear needs p = q = 2")
    m = _mesh(s, n)
    k = 1.0 / m.link
    diag = np.zeros(len(m.mass))
    diag[:-1] += k
    diag[1:] += k
    notes = []
    if m.trimmed != (0, 0):
        notes.append(f"dropped {m.trimmed[0]} + {m.trimmed[1]} negligible end cells")
    clamp_left, clamp_right = _dirichlet_ends(s, m, notes)
    if clamp_left:
        if m.trimmed[0]:
            raise OracleError("the Dirichlet end carries negligible mass; refine or use another boundary")
        diag[0] += 1.0 / m.left if m.left > 0 else math.inf
    if clamp_right:
        if m.trimmed[1]:
            raise OracleError("the Dirichlet end carries negligible mass; refine or use another boundary")
        diag[-1] += 1.0 / m.right if m.right > 0 else math.inf
    if not np.all(np.isfinite(diag)):
        raise OracleError("a Dirichlet end has zero nu_hat mass next to it")
    w = 1.0 / np.sqrt(m.mass)
    d = diag * w * w
    off = -k * w[:-1] * w[1:]
    index = 1 if s.boundary == "ergodic" else 0
    lam, iters, width = _bisect_eigenvalue(d, off, index, tol)
    if not lam > 0:
        raise OracleError("eigenvalue collapsed to zero (degenerate setup)")

    # Inverse iteration for the eigenvector, then the Rayleigh quotient.
    shift = lam * (1 - 1e-9)
    rng = np.random.default_rng(SEEDS[0])
    y = rng.standard_normal(len(d))
    for _ in range(4):
        y = _tridiag_solve(off, d - shift, off, y)
        y /= np.linalg.norm(y)
    # Rayleigh quotient in difference form: near a free end with a singular
    # weight the matrix entries dwarf lambda, and y @ T y or the Sturm pivots
    # lose digits to cancellation, while sums of squares do not.
    f = y * w
    num = float(np.sum(k * np.diff(f) ** 2))
    if clamp_left:
        num += f[0] ** 2 / m.left
    if clamp_right:
        num += f[-1] ** 2 / m.right
    rq = num / float(np.sum(m.mass * f * f))
    converged = width <= tol and abs(rq - lam) <= 1e-8 * lam
    if not converged:
        notes.append(f"bracket width {width:.3g}, Rayleigh mismatch {abs(rq - lam) / lam:.3g}")
    return OracleResult(rq ** -0.5, "linear_eig", n, iters, width, converged, lam, rq, notes=notes)


# Nonlinear one-sided case -------------------------------------------------------


def _ratio(f, delta, mass, weight, p, q) -> float:
    num = np.sum(mass * np.abs(f) ** q) ** (1.0 / q)
    den = np.sum(np.abs(delta) ** p / weight ** (p - 1)) ** (1.0 / p)
    return float(num / den)


def _fixed_point(mass, weight, p, q, tol, max_iter):
    """Two-integral iteration for the extremal of the Dirichlet-left problem."""
    n = len(mass)
    f = np.cumsum(weight)
    f /= f[-1]
    prev = _ratio(f, np.diff(f, prepend=0.0), mass, weight, p, q)
    change = math.inf
    it = 0
    while it < max_iter:
        it += 1
        far = np.cumsum((mass * f ** (q - 1))[::-1])[::-1]
        delta = weight * far ** (1.0 / (p - 1))
        f = np.cumsum(delta)
        f /= f[-1]
        r = _ratio(f, delta / np.cumsum(delta)[-1], mass, weight, p, q)
        change = abs(r - prev) / r
        prev = r
        if change < tol:
            break
    return prev, it, change, n


def _ascent(mass, weight, p, q, seed, tol, max_iter, centred: bool):
    """Projected gradient ascent on the unit p-sphere of scaled increments."""
    ps = conjugate(p)
    scale = weight ** (1.0 / ps)
    rng = np.random.default_rng(seed)
    u = np.abs(rng.standard_normal(len(weight))) if not centred else rng.standard_normal(len(weight))
    total = mass.sum()

    def unit(v):
        return v / np.sum(np.abs(v) ** p) ** (1.0 / p)

    def objective(v):
        f = np.cumsum(scale * v)
        if centred:
            f = np.concatenate([[0.0], f])
            g = f - (mass @ f) / total
        else:
            g = f
        return float(np.sum(mass * np.abs(g) ** q)), g

    def gradient(g):
        h = q * mass * np.abs(g) ** (q - 1) * np.sign(g)
        if centred:
            h = h - mass * h.sum() / total
            h = h[1:]
        return scale * np.cumsum(h[::-1])[::-1]

    u = unit(u)
    val, g = objective(u)
    step = 1.0
    change = math.inf
    quiet = 0
    it = 0
    while it < max_iter:
        it += 1
        grad = gradient(g)
        # Remove the radial part so the step follows the sphere.
        radial = np.abs(u) ** (p - 1) * np.sign(u)
        tangent = grad - (grad @ u) / (radial @ u) * radial
        norm = np.linalg.norm(tangent)
        if norm == 0:
            change = 0.0
            break
        direction = tangent / norm * np.linalg.norm(u)
        accepted = False
        while step > 1e-14:
            cand = unit(u + step * direction)
            cval, cg = objective(cand)
            if cval > val:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            change = 0.0
            break
        change = (cval - val) / cval / q
        u, val, g = cand, cval, cg
        step = min(step * 2.0, 1e3)
        # Small gains can also mean slow progress, so require a run of them.
        quiet = quiet + 1 if change < ASCENT_QUIET * tol else 0
        if quiet >= ASCENT_QUIET_RUN:
            break
    return val ** (1.0 / q), it, change


def oracle_nonlinear(s: HardySetup, n: int = 4096, tol: float = 1e-8, max_iter: int = 20000) -> OracleResult:
    """A for a one-sided Dirichlet condition and general (p, q)."""
    if s.boundary == "dirichlet_right":
        out = oracle_nonlinear(reflect(s), n, tol, max_iter)
        out.notes.append("computed on the mirror image")
        return out
    if s.boundary != "dirichlet_left":
        raise ValueError("oracle_nonlinear handles dirichlet_left and dirichlet_right")
    m = _mesh(s, n)
    _dirichlet_ends(s, m, [])
    if m.trimmed[0]:
        raise OracleError("the Dirichlet end carries negligible mass")
    if not (0 < m.left < math.inf):
        raise OracleError("nu_hat next to the Dirichlet end is zero or infinite")
    weight = np.concatenate([[m.left], m.link])
    mass = m.mass
    p, q = s.p, s.q
    notes = []
    if m.trimmed != (0, 0):
        notes.append(f"dropped {m.trimmed[0]} + {m.trimmed[1]} negligible end cells")

    ascents = [_ascent(mass, weight, p, q, seed, tol, max_iter, False) for seed in SEEDS]
    best_ascent = max(a[0] for a in ascents)
    if q < p:
        value = best_ascent
        it = sum(a[1] for a in ascents)
        change = max(a[2] for a in ascents)
        notes.append("q < p: gradient ascent only, value is a lower bound on A")
        return OracleResult(value, "nonlinear_iter", n, it, change, change < tol, lower_bound_only=True, notes=notes)

    value, it, change, _ = _fixed_point(mass, weight, p, q, tol, max_iter)
    converged = change < tol
    spread = max(abs(a[0] - value) for a in ascents) / value
    if spread > 5 * tol:
        raise OracleError(
            f"fixed point ({value:.12g}) and gradient ascent ({best_ascent:.12g}) disagree by {spread:.3g}"
        )
    if not converged:
        notes.append(f"fixed point stopped after {it} iterations")
    return OracleResult(value, "nonlinear_iter", n, it, change, converged, notes=notes)


def oracle_ergodic_nonlinear(s: HardySetup, n: int = 1024, tol: float = 1e-8, max_iter: int = 20000) -> OracleResult:
    """A for the centred inequality by multi-start projected gradient ascent."""
    if s.boundary != "ergodic":
        raise ValueError("oracle_ergodic_nonlinear needs the ergodic boundary kind")
    m = _mesh(s, n)
    runs = [_ascent(m.mass, m.link, s.p, s.q, seed, tol, max_iter, True) for seed in SEEDS]
    value = max(r[0] for r in runs)
    spread = (value - min(r[0] for r in runs)) / value
    notes = [f"multi-start spread {spread:.3g}"]
    if m.trimmed != (0, 0):
        notes.append(f"dropped {m.trimmed[0]} + {m.trimmed[1]} negligible end cells")
    it = sum(r[1] for r in runs)
    change = max(r[2] for r in runs)
    return OracleResult(value, "nonlinear_iter", n, it, change, change < tol, notes=notes)
