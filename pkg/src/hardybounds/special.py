"""Log-Gamma, Beta, conjugate exponents and the sharp factor k_{q,p}."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = ["Exponents", "conjugate", "log_gamma", "log_beta", "beta", "k_factor"]

# Lanczos approximation, g = 7, nine coefficients.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# Stirling series coefficients B_{2k} / (2k (2k-1)) for the large-argument branch.
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
)

DIAGONAL_THRESHOLD = 1e-8


def conjugate(p: float) -> float:
    """Conjugate exponent p/(p-1)."""
    if not p > 1:
        raise ValueError(f"conjugate exponent needs p > 1, got {p}")
    return p / (p - 1.0)


@dataclass(frozen=True)
class Exponents:
    p: float
    q: float
    p_star: float = field(init=False)
    q_ge_p: bool = field(init=False)

    def __post_init__(self):
        for name in ("p", "q"):
            v = getattr(self, name)
            if not (1 < v < math.inf):
                raise ValueError(f"{name} must lie in (1, inf), got {v}")
        object.__setattr__(self, "p_star", conjugate(self.p))
        object.__setattr__(self, "q_ge_p", self.q >= self.p)


def _stirling_correction(x: float) -> float:
    """lnΓ(x) - [(x - 1/2) ln x - x + ln√(2π)] for x >= 10."""
    inv = 1.0 / x
    inv2 = inv * inv
    acc = 0.0
    for c in reversed(_STIRLING):
        acc = acc * inv2 + c
    return acc * inv


def log_gamma(x: float) -> float:
    """Natural log of |Γ(x)|, Lanczos g=7 with reflection below 1/2."""
    if x < 0.5:
        s = math.sin(math.pi * x)
        if s == 0.0 or (x <= 0 and x == math.floor(x)):
            raise ValueError(f"log_gamma pole at {x}")
        return math.log(math.pi / abs(s)) - log_gamma(1.0 - x)
    z = x - 1.0
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(acc)


def log_beta(alpha: float, beta_: float) -> float:
    """ln B(alpha, beta) for positive arguments.

    When both arguments are large the Stirling corrections are combined
    separately so the leading terms cancel analytically.
    """
    if not (alpha > 0 and beta_ > 0):
        raise ValueError(f"log_beta needs positive arguments, got ({alpha}, {beta_})")
    a, b = min(alpha, beta_), max(alpha, beta_)
    if a >= 10.0:
        s = a + b
        corr = _stirling_correction(a) + _stirling_correction(b) - _stirling_correction(s)
        return (
            _HALF_LOG_2PI
            + (a - 0.5) * math.log(a / s)
            + b * math.log(b / s)
            - 0.5 * math.log(b)
            + corr
        )
    if b >= 10.0:
        # ln Γ(b) - ln Γ(a+b) via Stirling with log1p for the small ratio a/b
        s = a + b
        corr = _stirling_correction(b) - _stirling_correction(s)
        diff = -(b - 0.5) * math.log1p(a / b) - a * math.log(s) + a + corr
        return log_gamma(a) + diff
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b)


def beta(alpha: float, beta_: float) -> float:
    return math.exp(log_beta(alpha, beta_))


def k_factor(e: Exponents) -> float:
    """Sharp factor k_{q,p} for q >= p, with the closed limit on the diagonal."""
    p, q = e.p, e.q
    if q < p:
        raise ValueError(f"k_factor requires q >= p, got p={p}, q={q}")
    if q - p < DIAGONAL_THRESHOLD:
        ps = e.p_star
        return p ** (1.0 / p) * ps ** (1.0 / ps)
    r = q - p
    lb = log_beta(p / r, p * (q - 1.0) / r)
    # 1/p - 1/q written as r/(pq): the difference cancels near the diagonal.
    return math.exp(r / (p * q) * (math.log(r) - math.log(p) - lb))
