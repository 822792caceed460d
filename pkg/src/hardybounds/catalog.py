"""Built-in test setups used by the verifier and the test suite."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Tuple

from .bounds import HardySetup
from .measure import (
    EllipticCoefficients,
    Interval,
    WeightedMeasure,
    catalog_density,
    dual_measure,
    measures_from_elliptic,
)
from .special import Exponents

__all__ = ["CATALOG", "catalog_measures", "catalog_setup"]

# name -> (interval, description)
CATALOG = {
    "lebesgue": ((0.0, 1.0), "mu = nu = dx on (0, 1)"),
    "power:-0.5": ((0.0, 1.0), "mu = nu = x^-0.5 dx on (0, 1)"),
    "power:1": ((0.0, 1.0), "mu = nu = x dx on (0, 1)"),
    "gauss": ((-math.inf, math.inf), "mu = nu = exp(-x^2/2) dx on the line"),
    "ou": ((-math.inf, math.inf), "elliptic a = 1, b = -x, theta = 0 on the line"),
}


@lru_cache(maxsize=None)
def catalog_measures(name: str) -> Tuple[WeightedMeasure, WeightedMeasure]:
    """(mu, nu) for a catalog entry; cached so quadrature tables are shared."""
    if name not in CATALOG:
        raise KeyError(f"unknown catalog setup {name!r}; choose from {sorted(CATALOG)}")
    interval = Interval(*CATALOG[name][0])
    if name == "ou":
        mu, nu, _ = measures_from_elliptic(EllipticCoefficients("1", "-x", 0.0), interval)
        return mu, nu
    m = WeightedMeasure(interval, catalog_density(name), name)
    return m, m


@lru_cache(maxsize=None)
def _dual(name: str, p: float) -> WeightedMeasure:
    return dual_measure(catalog_measures(name)[1], p)


def catalog_setup(name: str, p: float = 2.0, q: float = 2.0, boundary: str = "ergodic") -> HardySetup:
    mu, nu = catalog_measures(name)
    return HardySetup(mu.interval, mu, nu, _dual(name, float(p)), Exponents(p, q), boundary)
