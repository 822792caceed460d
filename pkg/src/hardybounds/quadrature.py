"""Adaptive Gauss-Kronrod panel tables over a bounded reference coordinate.

A :class:`PanelTable` integrates ``g(t)`` over ``(t_lo, t_hi)`` by bisecting
G7/K15 panels until every panel meets a relative tolerance.  Panels touching
an endpoint are refined geometrically toward it; if the endpoint panel has
not converged after ``max_depth`` bisections its contribution is replaced
by a geometric tail extrapolation, or by an infinite value when the tail
does not decay.  Queries between arbitrary points combine exact table sums
with a Gauss-Legendre correction on the partial panels.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["Transform", "endpoint_transform", "PanelTable", "QuadratureError"]


class QuadratureError(ArithmeticError):
    pass


# Kronrod 15-point abscissae/weights and embedded Gauss 7-point weights.
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
NODES15 = np.concatenate([-_XK[:-1], _XK[::-1]])
WEIGHTS_K15 = np.concatenate([_WK[:-1], _WK[::-1]])
WEIGHTS_G7 = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes (±xk[1], ±xk[3], ±xk[5], 0).
for _i, _w in zip((1, 3, 5), _WG[:3]):
    WEIGHTS_G7[_i] = _w
    WEIGHTS_G7[14 - _i] = _w
WEIGHTS_G7[7] = _WG[3]

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(20)
MAX_PANEL_SPREAD = 1e4
MIN_RELATIVE_WIDTH = 1e-9
STALL_RATIO = 0.45
STALL_RELATIVE = 1e-4
STALL_LEVELS = 3
# Shell ratio at or above which an endpoint tail is declared divergent.
DIVERGENT_RATIO = 0.999


@dataclass(frozen=True)
class Transform:
    """Monotone map x = to_x(t) from (t_lo, t_hi) onto the working interval."""

    kind: str
    t_lo: float
    t_hi: float
    shift: float = 0.0

    def to_x(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            if self.kind == "identity":
                return t
            if self.kind == "right_inf":
                return self.shift + t / (1.0 - t)
            if self.kind == "left_inf":
                return self.shift + t / (1.0 + t)
            # tan(πt/2) = ±cot(π(1-|t|)/2); 1-|t| is exact for |t| >= 1/2.
            return np.sign(t) / np.tan(0.5 * np.pi * (1.0 - np.abs(t)))

    def dx_dt(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            if self.kind == "identity":
                return np.ones_like(t)
            if self.kind == "right_inf":
                return 1.0 / (1.0 - t) ** 2
            if self.kind == "left_inf":
                return 1.0 / (1.0 + t) ** 2
            return 0.5 * np.pi / np.sin(0.5 * np.pi * (1.0 - np.abs(t))) ** 2

    def to_t(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "identity":
                return x
            if self.kind == "right_inf":
                u = x - self.shift
                return np.where(np.isinf(u), 1.0, u / (1.0 + u))
            if self.kind == "left_inf":
                u = x - self.shift
                return np.where(np.isinf(u), -1.0, u / (1.0 - u))
            return np.arctan(x) * (2.0 / np.pi)


def endpoint_transform(left: float, right: float) -> Transform:
    """Change of variable for an interval; bounded intervals get the identity."""
    if not left < right:
        raise ValueError(f"empty interval ({left}, {right})")
    if math.isinf(left) and math.isinf(right):
        return Transform("tangent", -1.0, 1.0)
    if math.isinf(right):
        return Transform("right_inf", 0.0, 1.0, shift=left)
    if math.isinf(left):
        return Transform("left_inf", -1.0, 0.0, shift=right)
    return Transform("identity", left, right)


def _gk15(g, a, b):
    """K15 estimates, |K15 - G7| errors and an all-nodes-non-finite flag per panel."""
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = mid[:, None] + half[:, None] * NODES15[None, :]
    vals = g(nodes)
    finite = np.isfinite(vals)
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        scale = np.max(np.where(finite, np.abs(vals), 0.0), axis=1)
        scale = np.where(scale > 0, scale, 1.0)
        unit = vals / scale[:, None]
        k = half * (unit @ WEIGHTS_K15) * scale
        gg = half * (unit @ WEIGHTS_G7) * scale
        err = np.abs(k - gg)
    # Panels whose value cannot be represented are final: either every node
    # overflowed or the weighted sum of finite nodes did.
    dead = ~np.any(finite, axis=1) | (np.all(finite, axis=1) & np.isinf(k))
    # Same-sign panels must also have a bounded dynamic range so that partial
    # Gauss-Legendre corrections inside them stay accurate in the tails.
    with np.errstate(invalid="ignore", divide="ignore"):
        absu = np.abs(unit)
        one_sign = np.all(unit >= 0, axis=1) | np.all(unit <= 0, axis=1)
        spread = np.max(absu, axis=1) / np.min(absu, axis=1)
    flat = ~one_sign | ~finite.all(axis=1) | (spread <= MAX_PANEL_SPREAD) | (np.max(absu, axis=1) == 0)
    return k, err, dead, flat


class PanelTable:
    """Cumulative table of ∫ g(t) dt on (t_lo, t_hi).

    ``g`` must accept arrays of any shape.  Values may be signed; the
    relative tolerance applies panel by panel.
    """

    def __init__(
        self,
        g: Callable[[np.ndarray], np.ndarray],
        t_lo: float,
        t_hi: float,
        rtol: float = 1e-10,
        atol: float = 1e-14,
        max_depth: int = 60,
        initial_panels: int = 32,
        max_panels: int = 200_000,
    ):
        self.g = g
        self.t_lo = float(t_lo)
        self.t_hi = float(t_hi)
        self.rtol = rtol
        self.atol = atol
        self.max_depth = max_depth
        self._build(initial_panels, max_panels)

    def _build(self, initial_panels, max_panels):
        edges = np.linspace(self.t_lo, self.t_hi, initial_panels + 1)
        a, b = edges[:-1], edges[1:]
        depth = np.zeros(initial_panels, dtype=int)
        perr = np.full(initial_panels, np.inf)
        stall = np.zeros(initial_panels, dtype=int)
        width0 = (self.t_hi - self.t_lo) / initial_panels
        parts = []
        count = 0
        while a.size:
            v, e, dead, flat = _gk15(self.g, a, b)
            ok = np.isfinite(v) & (e <= np.maximum(self.rtol * np.abs(v), self.atol * (b - a) / width0))
            # Stop once node positions carry too few significant digits.
            unresolved = (b - a) <= MIN_RELATIVE_WIDTH * np.maximum(np.abs(a), np.abs(b))
            # Rounding noise in the integrand: the error stops halving under
            # bisection although it is already small relative to the value.
            interior = (a > self.t_lo) & (b < self.t_hi)
            with np.errstate(invalid="ignore"):
                noisy = interior & (e >= STALL_RATIO * perr) & (e <= STALL_RELATIVE * np.abs(v))
            stall = np.where(noisy, stall + 1, 0)
            stalled = stall >= STALL_LEVELS
            accept = (ok & flat) | dead | unresolved | stalled | (depth >= self.max_depth)
            parts.append((a[accept], b[accept], v[accept], e[accept], ok[accept]))
            count += int(accept.sum())
            keep = ~accept
            a, b, depth, perr, stall = a[keep], b[keep], depth[keep], e[keep], stall[keep]
            if count + 2 * a.size > max_panels:
                raise QuadratureError(f"panel budget exhausted with {a.size} unconverged panels")
            m = 0.5 * (a + b)
            a, b = np.concatenate([a, m]), np.concatenate([m, b])
            depth = np.concatenate([depth, depth]) + 1
            perr = np.concatenate([perr, perr])
            stall = np.concatenate([stall, stall])
        a, b, v, e, ok = (np.concatenate([p[i] for p in parts]) for i in range(5))
        order = np.argsort(a, kind="stable")
        a, b, v, e, ok = a[order], b[order], v[order], e[order], ok[order]

        v = np.where(np.isnan(v), np.inf, v)
        self.left_divergent = self.right_divergent = False
        self.left_singular = self.right_singular = False
        # Exponent of the power law fitted to a singular end panel, if any.
        self._beta_left = self._beta_right = None
        if not ok[0]:
            v[0], self.left_divergent, self._beta_left = self._end_panel(v, a, b, True)
            self.left_singular = True
        if not ok[-1] and len(v) > 1:
            v[-1], self.right_divergent, self._beta_right = self._end_panel(v, a, b, False)
            self.right_singular = True
        # Worst relative error among interior panels that missed the tolerance.
        inner = ~ok[1:-1] & np.isfinite(v[1:-1])
        with np.errstate(invalid="ignore", divide="ignore"):
            rel = e[1:-1][inner] / np.maximum(np.abs(v[1:-1][inner]), self.atol)
        self.achieved_error = float(rel.max(initial=0.0))
        self.unconverged_interior = int((~ok[1:-1]).sum()) if len(ok) > 2 else 0

        self.breaks = np.concatenate([a, b[-1:]])
        self.panels = v
        n = len(v)
        with np.errstate(invalid="ignore"):
            self.from_left = np.concatenate([[0.0], np.cumsum(v)])
            self.to_right = np.concatenate([np.cumsum(v[::-1])[::-1], [0.0]])
            c = n // 2
            fc = np.zeros(n + 1)
            fc[c + 1:] = np.cumsum(v[c:])
            fc[:c] = -np.cumsum(v[:c][::-1])[::-1]
        self.from_center = fc
        # Plain-float copies for the scalar query path.
        self._b = self.breaks.tolist()
        self._v = self.panels.tolist()
        self._anchors = (self.from_left.tolist(), self.to_right.tolist(), fc.tolist())

    @staticmethod
    def _shells(v, a, b, left: bool):
        """Sums over the dyadic shells [h, 2h] and [2h, 4h] next to an end panel of width h."""
        if not left:
            # Mirror so the same forward walk works from the right end.
            v, a, b = v[::-1], -b[::-1], -a[::-1]
        x0, h = a[0], b[0] - a[0]
        sums, i = [], 1
        for k in (2.0, 4.0):
            target, acc = x0 + k * h, 0.0
            while i < len(v) and b[i] <= target + 1e-6 * h:
                acc += v[i]
                i += 1
            if i == 1 or abs(b[i - 1] - target) > 1e-6 * h:
                return None
            sums.append(acc)
        return sums

    def _end_panel(self, v, a, b, left: bool):
        """Replace an unconverged endpoint panel by a geometric tail or ±inf."""
        val = v[0] if left else v[-1]
        if len(v) < 3 or not np.isfinite(val):
            return (math.copysign(np.inf, val) if not np.isfinite(val) else val), not np.isfinite(val), None
        shells = self._shells(v, a, b, left)
        if shells is None:
            return val, False, None
        n1, n2 = shells
        if not (np.isfinite(n1) and np.isfinite(n2)) or n2 == 0:
            return val, False, None
        # Shell masses scale like 2^(-beta) for an x^(beta-1) end behaviour.
        r = n1 / n2
        if r >= DIVERGENT_RATIO:
            return math.copysign(np.inf, n1), True, None
        if r <= 0:
            return val, False, None
        return n1 * r / (1.0 - r), False, -math.log2(r)

    def _partial(self, lo, hi):
        """∫_lo^hi g by 20-point Gauss-Legendre (lo <= hi elementwise)."""
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        nodes = mid[..., None] + half[..., None] * GL_NODES
        vals = self.g(nodes)
        with np.errstate(invalid="ignore", over="ignore"):
            out = half * (vals @ GL_WEIGHTS)
        return np.where(half == 0, 0.0, out)

    def _locate(self, t):
        k = np.searchsorted(self.breaks, t, side="right") - 1
        return np.clip(k, 0, len(self.panels) - 1)

    def _head(self, t):
        """∫ from t_lo to t for t inside a singular first panel."""
        t = np.asarray(t, dtype=float)
        v0, b1 = self.panels[0], self.breaks[1]
        with np.errstate(all="ignore"):
            if self._beta_left is not None:
                out = v0 * np.power((t - self.t_lo) / (b1 - self.t_lo), self._beta_left)
            else:
                out = v0 - self._partial(t, np.full_like(t, b1))
        return np.where(t <= self.t_lo, 0.0, out)

    def _tail(self, t):
        """∫ from t to t_hi for t inside a singular last panel."""
        t = np.asarray(t, dtype=float)
        vn, bn = self.panels[-1], self.breaks[-2]
        with np.errstate(all="ignore"):
            if self._beta_right is not None:
                out = vn * np.power((self.t_hi - t) / (self.t_hi - bn), self._beta_right)
            else:
                out = vn - self._partial(np.full_like(t, bn), t)
        return np.where(t >= self.t_hi, 0.0, out)

    def _end_masks(self, ta, tb, ka, kb):
        """Queries answered by the end-panel models rather than Gauss-Legendre.

        Without a fitted power law only queries reaching the end itself use
        the tabulated end value; interior pieces of the panel stay with GL.
        """
        last = len(self.panels) - 1
        lo = self.left_singular & (ka == 0) & ((ta <= self.t_lo) | (self._beta_left is not None))
        hi = self.right_singular & (kb == last) & ((tb >= self.t_hi) | (self._beta_right is not None))
        return lo, hi

    def _integral_scalar(self, ta: float, tb: float) -> float:
        """Same algorithm as :meth:`integral` for one pair, without array overhead."""
        if ta == tb:
            return 0.0
        br, v = self._b, self._v
        last = len(v) - 1
        ka = min(max(bisect.bisect_right(br, ta) - 1, 0), last)
        kb = min(max(bisect.bisect_right(br, tb) - 1, 0), last)
        lo_end, hi_end = self._end_masks(ta, tb, ka, kb)
        if ka == kb:
            if lo_end:
                return float(self._head(tb) - self._head(ta))
            if hi_end:
                return float(self._tail(ta) - self._tail(tb))
            return float(self._partial(np.array([ta]), np.array([tb]))[0])
        if lo_end or hi_end:
            pa = v[0] - float(self._head(ta)) if lo_end else float(self._partial(np.array(ta), np.array(br[ka + 1])))
            pb = v[last] - float(self._tail(tb)) if hi_end else float(self._partial(np.array(br[kb]), np.array(tb)))
        else:
            both = self._partial(np.array([ta, br[kb]]), np.array([br[ka + 1], tb]))
            pa, pb = float(both[0]), float(both[1])
        i0, i1 = ka + 1, kb
        mid = 0.0
        if i1 > i0:
            best = None
            fl, tr, fc = self._anchors
            for s_, m_ in (
                (fl[i1] - fl[i0], max(abs(fl[i1]), abs(fl[i0]))),
                (tr[i0] - tr[i1], max(abs(tr[i0]), abs(tr[i1]))),
                (fc[i1] - fc[i0], max(abs(fc[i1]), abs(fc[i0]))),
            ):
                if not math.isnan(s_) and (best is None or m_ < best[1]):
                    best = (s_, m_)
            if best is None:
                with np.errstate(invalid="ignore"):
                    mid = float(self.panels[i0:i1].sum())
            else:
                mid = best[0]
        return pa + mid + pb

    def integral(self, ta, tb):
        """∫_ta^tb g for arrays with t_lo <= ta <= tb <= t_hi."""
        if np.size(ta) == 1 and np.size(tb) == 1:
            shape = np.broadcast(np.asarray(ta), np.asarray(tb)).shape
            val = self._integral_scalar(float(np.ravel(ta)[0]), float(np.ravel(tb)[0]))
            return np.full(shape, val)
        ta, tb = np.broadcast_arrays(np.asarray(ta, dtype=float), np.asarray(tb, dtype=float))
        ka = self._locate(ta)
        kb = self._locate(tb)
        last = len(self.panels) - 1
        lo_end, hi_end = self._end_masks(ta, tb, ka, kb)
        same = ka == kb

        upper_a = np.where(same, tb, self.breaks[np.minimum(ka + 1, last + 1)])
        lower_b = np.where(same, tb, self.breaks[kb])
        # Both partial pieces in one batched evaluation of g.
        both = self._partial(np.stack([ta, lower_b]), np.stack([upper_a, tb]))
        pa, pb = both[0], both[1]
        with np.errstate(invalid="ignore"):
            if np.any(lo_end):
                m = lo_end
                ha = self._head(ta[m])
                hb = self._head(tb[m])
                pa = pa.copy()
                pa[m] = np.where(same[m], hb - ha, self.panels[0] - ha)
            if np.any(hi_end):
                m = hi_end
                tb_ = self._tail(tb[m])
                pb = pb.copy()
                pb[m] = self.panels[last] - tb_
                only_hi = m & same & ~lo_end
                if np.any(only_hi):
                    pa = pa.copy()
                    pa[only_hi] = self._tail(ta[only_hi]) - self._tail(tb[only_hi])
        pb = np.where(same, 0.0, pb)

        i0, i1 = ka + 1, np.maximum(kb, ka + 1)
        with np.errstate(invalid="ignore"):
            sums = np.stack([
                self.from_left[i1] - self.from_left[i0],
                self.to_right[i0] - self.to_right[i1],
                self.from_center[i1] - self.from_center[i0],
            ])
            mags = np.stack([
                np.maximum(np.abs(self.from_left[i1]), np.abs(self.from_left[i0])),
                np.maximum(np.abs(self.to_right[i0]), np.abs(self.to_right[i1])),
                np.maximum(np.abs(self.from_center[i1]), np.abs(self.from_center[i0])),
            ])
        # Prefer the anchor with the smallest operands; never one giving inf - inf.
        valid = ~np.isnan(sums)
        pick = np.argmin(np.where(valid, mags, np.inf), axis=0)
        chosen_valid = np.take_along_axis(valid, pick[None, ...], axis=0)[0]
        pick = np.where(chosen_valid, pick, np.argmax(valid, axis=0))
        all_nan = ~np.any(valid, axis=0)
        mid = np.take_along_axis(sums, pick[None, ...], axis=0)[0]
        if np.any(all_nan & (i1 > i0)):
            mid = np.where(all_nan, self._sum_panels(i0, i1), mid)
        mid = np.where(i1 > i0, mid, 0.0)
        with np.errstate(invalid="ignore"):
            return np.where(ta == tb, 0.0, pa + mid + pb)

    def _sum_panels(self, i0, i1):
        out = np.zeros(np.shape(i0))
        for idx in np.ndindex(out.shape):
            with np.errstate(invalid="ignore"):
                out[idx] = self.panels[i0[idx]:i1[idx]].sum()
        return out

    def total(self) -> float:
        with np.errstate(invalid="ignore"):
            return float(self.panels.sum())
