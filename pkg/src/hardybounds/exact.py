"""Closed forms for the Lebesgue model case on (0, 1) with f(0) = 0.

Here mu = nu = dx and the optimal constant is known exactly, which makes it
the reference problem for the improved estimates collected in
:class:`ImprovementChain`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List

import numpy as np

from .measure import Interval, WeightedMeasure
from .optimize import sup_1d
from .special import Exponents, conjugate, k_factor, log_beta

__all__ = [
    "DEFAULT_READING",
    "READINGS",
    "ImprovementChain",
    "exact_A",
    "prop_B",
    "prop_delta1_bar",
    "prop_A_star",
    "prop_delta1",
    "delta1_exponent",
    "improvement_chain",
]

READINGS = ("A", "B")
# Both readings keep the ordering chain intact on the whole test grid, so the
# one whose exponent matches the prefactor is the default.
DEFAULT_READING = "B"
CHAIN_SLACK = 1e-9
DELTA1_GRID = 1025


def _check(p: float, q: float) -> Exponents:
    return Exponents(float(p), float(q))


def exact_A(p: float, q: float) -> float:
    """Optimal constant for mu = nu = dx on (0, 1), f(0) = 0."""
    _check(p, q)
    log_num = (
        math.log(p) / q
        + (1.0 - 1.0 / p) * math.log(q)
        + (1.0 / p - 1.0 / q) * math.log(p * q + p - q)
    )
    log_den = math.log(p - 1.0) / p + log_beta(1.0 / q, 1.0 - 1.0 / p)
    return math.exp(log_num - log_den)


def prop_B(p: float, q: float) -> float:
    _check(p, q)
    return p ** (1 / q) * ((p - 1) * q) ** (1 - 1 / p) / (p * q + p - q) ** (1 - 1 / p + 1 / q)


def prop_delta1_bar(p: float, q: float) -> float:
    _check(p, q)
    return p ** (1 / q) * ((p - 1) * (q + 1)) ** (1 - 1 / p) / (p * q + p - q) ** (1 - 1 / p + 1 / q)


def prop_A_star(p: float, q: float) -> float:
    """Improved upper estimate; equals exact_A on the diagonal q = p."""
    _check(p, q)
    ps = conjugate(p)
    s = ps + q
    return (ps / q) ** (1 / q) * (s / (math.pi * ps) * math.sin(math.pi * ps / s)) ** (1 / ps + 1 / q)


def delta1_exponent(p: float, q: float, reading: str = DEFAULT_READING) -> float:
    """Exponent E of y in the delta_1 integrand (1 - y^E)^(p*/q).

    Reading ``A`` is (q/gamma*)/p* + 1, reading ``B`` is q gamma*/p* + 1.
    """
    ps = conjugate(p)
    g = q / (ps + q)
    if reading == "A":
        return q / (g * ps) + 1.0
    if reading == "B":
        return q * g / ps + 1.0
    raise ValueError(f"reading must be one of {READINGS}, got {reading!r}")


@lru_cache(maxsize=4096)
def _delta1(p: float, q: float, reading: str) -> float:
    ps = conjugate(p)
    g = q / (ps + q)
    e = delta1_exponent(p, q, reading)
    power = ps / q

    def dens(y):
        with np.errstate(invalid="ignore"):
            return np.power(np.clip(1.0 - np.power(y, e), 0.0, None), power)

    m = WeightedMeasure(Interval(0.0, 1.0), dens, "delta1 integrand", check=False)

    def objective(x):
        return m.mass_t(0.0, x) * np.power(x, -g)

    s = sup_1d(objective, 0.0, 1.0, n=DELTA1_GRID)
    return (q * g / ps + 1.0) ** (-1.0 / q) * s.value ** (1.0 / ps)


def prop_delta1(p: float, q: float, reading: str = DEFAULT_READING) -> float:
    """Improved upper estimate delta_1 (inner supremum computed numerically)."""
    _check(p, q)
    if reading not in READINGS:
        raise ValueError(f"reading must be one of {READINGS}, got {reading!r}")
    return _delta1(float(p), float(q), reading)


@dataclass
class ImprovementChain:
    p: float
    q: float
    B: float
    delta1_bar: float
    A_exact: float
    A_star: float
    delta1: float
    kB: float
    gamma_star: float
    reading: str = DEFAULT_READING
    violations: List[str] = field(default_factory=list)

    NAMES = ("B", "delta1_bar", "A_exact", "A_star", "delta1", "kB")

    def values(self) -> tuple:
        return tuple(getattr(self, n) for n in self.NAMES)

    @property
    def ok(self) -> bool:
        return not self.violations


def improvement_chain(p: float, q: float, reading: str = DEFAULT_READING) -> ImprovementChain:
    """B <= delta1_bar <= A <= A* <= delta1 <= k_{q,p} B, with any broken link recorded."""
    e = _check(p, q)
    if not e.q_ge_p:
        raise ValueError(f"the improvement chain is stated for q >= p, got p={p}, q={q}")
    b = prop_B(p, q)
    chain = ImprovementChain(
        p=float(p),
        q=float(q),
        B=b,
        delta1_bar=prop_delta1_bar(p, q),
        A_exact=exact_A(p, q),
        A_star=prop_A_star(p, q),
        delta1=prop_delta1(p, q, reading),
        kB=k_factor(e) * b,
        gamma_star=q / (e.p_star + q),
        reading=reading,
    )
    vals = chain.values()
    for (n1, v1), (n2, v2) in zip(zip(chain.NAMES, vals), zip(chain.NAMES[1:], vals[1:])):
        if v1 > v2 + CHAIN_SLACK:
            chain.violations.append(f"{n1} = {v1:.12g} exceeds {n2} = {v2:.12g} at p={p:g}, q={q:g}")
    return chain
