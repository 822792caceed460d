import math

import numpy as np
import pytest
from scipy import optimize as sopt

from hardybounds.optimize import golden_max, reference_grid, sup_1d, sup_2d


def test_golden_max_quadratic():
    t, v = golden_max(lambda x: -(x - 0.3) ** 2, 0.0, 1.0, 1e-12)
    assert t == pytest.approx(0.3, abs=1e-8)
    assert v == pytest.approx(0.0, abs=1e-15)


def test_golden_max_reports_edge_exactly():
    t, v = golden_max(lambda x: x, 0.0, 2.0)
    assert t == 2.0 and v == 2.0


def test_reference_grid_probes_and_margin():
    g = reference_grid(0.0, 1.0, 17)
    assert g[0] > 0 and g[-1] < 1
    assert np.all(np.diff(g) > 0)
    assert g[0] <= 1e-11 + 1e-12


def test_sup_1d_against_scipy():
    f = lambda t: np.sin(3 * t) * np.exp(-t)
    r = sup_1d(f, 0.0, 2.0)
    ref = sopt.minimize_scalar(lambda t: -f(t), bounds=(0, 2), method="bounded", options={"xatol": 1e-12})
    assert r.value == pytest.approx(-ref.fun, rel=1e-12)
    assert r.t == pytest.approx(ref.x, abs=1e-6)


def test_sup_1d_nan_and_inf_conventions():
    assert sup_1d(lambda t: np.full_like(t, np.nan), 0.0, 1.0).value == 0.0
    r = sup_1d(lambda t: np.where(t > 0.5, np.inf, 1.0), 0.0, 1.0)
    assert r.value == math.inf


def test_sup_1d_boundary_layer():
    # Peak of width 1e-6 next to the left end, invisible on the uniform grid.
    f = lambda t: (t / 1e-6) * np.exp(-t / 1e-6)
    r = sup_1d(f, 0.0, 1.0)
    assert r.value == pytest.approx(math.exp(-1), rel=1e-9)


def test_sup_2d_triangle_against_analytic():
    # [1/x + 1/(1-y)] / (y - x) is minimised at (1/4, 3/4) with value 16.
    f = lambda x, y: (y - x) / (1 / x + 1 / (1 - y))
    r = sup_2d(f, 0.0, 1.0)
    assert r.value == pytest.approx(1 / 16, rel=1e-12)
    assert r.tx == pytest.approx(0.25, abs=1e-5)
    assert r.ty == pytest.approx(0.75, abs=1e-5)
    assert r.tx <= r.ty


def test_sup_2d_multimodal_picks_global():
    f = lambda x, y: np.exp(-50 * ((x - 0.1) ** 2 + (y - 0.2) ** 2)) + 1.5 * np.exp(-50 * ((x - 0.6) ** 2 + (y - 0.9) ** 2))
    r = sup_2d(f, 0.0, 1.0)
    assert r.value == pytest.approx(1.5, rel=1e-9)
    assert r.tx == pytest.approx(0.6, abs=1e-4)


def test_sup_2d_is_deterministic():
    f = lambda x, y: np.sin(5 * x) * np.cos(3 * y) * (y - x)
    a, b = sup_2d(f, 0.0, 1.0), sup_2d(f, 0.0, 1.0)
    assert a == b
