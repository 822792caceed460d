"""Parameter sweeps over the Lebesgue model case, written as CSV."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import List, Optional, Sequence, Tuple

from .exact import DEFAULT_READING, ImprovementChain, improvement_chain

__all__ = ["HEADER", "SweepError", "SweepRow", "grid_values", "sweep_points", "compute_rows", "to_csv"]

HEADER = ("p", "q", "B", "delta1_bar", "A", "A_star", "delta1", "kB")
DIGITS = 12


class SweepError(ValueError):
    pass


@dataclass(frozen=True)
class SweepRow:
    p: float
    q: float
    values: Tuple[float, ...]
    violations: Tuple[str, ...]

    @classmethod
    def from_chain(cls, c: ImprovementChain) -> "SweepRow":
        return cls(c.p, c.q, c.values(), tuple(c.violations))


def grid_values(lo: float, hi: float, step: float) -> List[float]:
    """lo, lo + step, ... up to hi; points are rounded so output is byte-stable."""
    if not (math.isfinite(lo) and math.isfinite(hi) and math.isfinite(step)):
        raise SweepError("sweep range and step must be finite")
    if step <= 0:
        raise SweepError(f"step must be positive, got {step}")
    if hi < lo:
        raise SweepError(f"empty range {lo},{hi}")
    n = int(math.floor((hi - lo) / step + 1e-9))
    return [round(lo + i * step, DIGITS) for i in range(n + 1)]


def sweep_points(p: Optional[float] = None, r_range: Optional[Tuple[float, float]] = None,
                 p_range: Optional[Tuple[float, float]] = None, step: float = 0.05,
                 diagonal: bool = False) -> List[Tuple[float, float]]:
    """(p, q) pairs in grid order: p outer, r = q - p inner."""
    if diagonal:
        if p_range is None:
            raise SweepError("a diagonal sweep needs --p-range")
        return [(x, x) for x in grid_values(*p_range, step)]
    if r_range is None:
        raise SweepError("an off-diagonal sweep needs --r-range")
    if (p is None) == (p_range is None):
        raise SweepError("give exactly one of --p and --p-range")
    ps = [float(p)] if p is not None else grid_values(*p_range, step)
    rs = grid_values(*r_range, step)
    if min(rs) < 0:
        raise SweepError("r = q - p must be >= 0")
    return [(x, round(x + r, DIGITS)) for x in ps for r in rs]


def _row(pq: Tuple[float, float], reading: str) -> SweepRow:
    return SweepRow.from_chain(improvement_chain(pq[0], pq[1], reading))


def compute_rows(points: Sequence[Tuple[float, float]], reading: str = DEFAULT_READING,
                 workers: int = 1) -> List[SweepRow]:
    """Rows in the order of ``points`` however the pool schedules them."""
    fn = partial(_row, reading=reading)
    if workers <= 1 or len(points) < 2:
        return [fn(pq) for pq in points]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, points, chunksize=max(1, len(points) // (8 * workers))))


def _fmt(v: float) -> str:
    return f"{v:.{DIGITS}g}"


def to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in rows:
        w.writerow([_fmt(r.p), _fmt(r.q)] + [_fmt(v) for v in r.values])
    return buf.getvalue()
