import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from hardybounds.quadrature import PanelTable, endpoint_transform


def table_on(f, left, right, **kw):
    tr = endpoint_transform(left, right)

    def g(t):
        with np.errstate(all="ignore"):
            return f(tr.to_x(t)) * tr.dx_dt(t)

    return tr, PanelTable(g, tr.t_lo, tr.t_hi, **kw)


def integral_x(tr, tab, a, b):
    return float(tab.integral(tr.to_t(a), tr.to_t(b)))


@pytest.mark.parametrize("left, right, kind", [(0.0, 1.0, "identity"), (0.0, math.inf, "right_inf"),
                                               (-math.inf, 2.0, "left_inf"),
                                               (-math.inf, math.inf, "tangent")])
def test_transform_kinds(left, right, kind):
    assert endpoint_transform(left, right).kind == kind


def test_half_line_map_and_derivative():
    tr = endpoint_transform(0.0, math.inf)
    t = np.linspace(0.01, 0.99, 9)
    np.testing.assert_allclose(tr.to_x(t), t / (1 - t), rtol=1e-15)
    np.testing.assert_allclose(tr.dx_dt(t), 1 / (1 - t) ** 2, rtol=1e-15)


def test_line_map_is_tangent():
    tr = endpoint_transform(-math.inf, math.inf)
    t = np.linspace(-0.99, 0.99, 13)
    np.testing.assert_allclose(tr.to_x(t), np.tan(np.pi * t / 2), rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(tr.dx_dt(t), np.pi / 2 / np.cos(np.pi * t / 2) ** 2, rtol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e6, 1e6), st.sampled_from([(0.0, math.inf), (-math.inf, 3.0), (-math.inf, math.inf)]))
def test_transform_round_trip(x, iv):
    lo, hi = iv
    if not lo < x < hi:
        return
    tr = endpoint_transform(lo, hi)
    assert float(tr.to_x(tr.to_t(x))) == pytest.approx(x, rel=1e-9, abs=1e-9)


def test_derivative_matches_finite_difference():
    for lo, hi in [(0.0, math.inf), (-math.inf, 1.0), (-math.inf, math.inf)]:
        tr = endpoint_transform(lo, hi)
        t = np.linspace(tr.t_lo, tr.t_hi, 11)[1:-1]
        h = 1e-6
        fd = (tr.to_x(t + h) - tr.to_x(t - h)) / (2 * h)
        np.testing.assert_allclose(tr.dx_dt(t), fd, rtol=1e-6)


def test_empty_interval_rejected():
    with pytest.raises(ValueError):
        endpoint_transform(1.0, 1.0)


@pytest.mark.parametrize("f, lo, hi", [
    (lambda x: np.exp(-x), 0.0, math.inf),
    (lambda x: np.exp(-0.5 * x * x), -math.inf, math.inf),
    (lambda x: 1 / (1 + x * x), -math.inf, math.inf),
    (lambda x: np.sin(x) ** 2, 0.0, 3.0),
    (lambda x: np.exp(x), -math.inf, 0.0),
])
def test_totals_match_scipy(f, lo, hi):
    _, tab = table_on(f, lo, hi)
    want = integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=500)[0]
    assert tab.total() == pytest.approx(want, rel=1e-10)


@pytest.mark.parametrize("alpha", [-0.5, -0.9, -0.99])
def test_integrable_endpoint_singularity(alpha):
    _, tab = table_on(lambda x: np.power(x, alpha), 0.0, 1.0)
    assert tab.total() == pytest.approx(1 / (1 + alpha), rel=1e-8)


@pytest.mark.parametrize("f, lo, hi", [
    (lambda x: 1 / x, 0.0, 1.0),
    (lambda x: np.power(x, -1.5), 0.0, 1.0),
    (lambda x: 1 / (1 - x), 0.0, 1.0),
    (lambda x: np.ones_like(x), 0.0, math.inf),
    (lambda x: np.exp(0.5 * x * x), -math.inf, math.inf),
])
def test_divergent_integrals_are_infinite(f, lo, hi):
    _, tab = table_on(f, lo, hi)
    assert tab.total() == math.inf


def test_partial_integrals_match_antiderivative():
    tr, tab = table_on(lambda x: np.power(x, -0.5), 0.0, 1.0)
    for a, b in [(0.0, 0.25), (0.1, 0.9), (0.3, 0.30001), (0.5, 1.0), (0.0, 1.0)]:
        assert integral_x(tr, tab, a, b) == pytest.approx(2 * (math.sqrt(b) - math.sqrt(a)), rel=1e-9)


def test_vector_and_scalar_queries_agree():
    tr, tab = table_on(lambda x: np.exp(-0.5 * x * x), -math.inf, math.inf)
    rng = np.random.default_rng(7)
    a = np.sort(rng.uniform(-0.99, 0.99, size=(50, 2)), axis=1)
    vec = tab.integral(a[:, 0], a[:, 1])
    for i in range(len(a)):
        assert float(tab.integral(a[i, 0], a[i, 1])) == pytest.approx(vec[i], rel=1e-14, abs=1e-300)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=3, max_size=3))
def test_additivity(pts):
    a, b, c = sorted(pts)
    tr, tab = _power_table()
    lhs = integral_x(tr, tab, a, c)
    rhs = integral_x(tr, tab, a, b) + integral_x(tr, tab, b, c)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)


_CACHE = {}


def _power_table():
    if "p" not in _CACHE:
        _CACHE["p"] = table_on(lambda x: np.power(x, -0.7) + np.cos(5 * x), 0.0, 1.0)
    return _CACHE["p"]


def test_signed_integrand():
    _, tab = table_on(lambda x: np.sin(x), 0.0, 2 * math.pi)
    assert abs(tab.total()) < 1e-12
    _, tab = table_on(lambda x: -x, 0.0, 2.0)
    assert tab.total() == pytest.approx(-2.0, rel=1e-14)
