import math
import threading

import numpy as np
import pytest
from scipy import integrate

from hardybounds.measure import (
    EllipticCoefficients,
    Interval,
    MeasureError,
    WeightedMeasure,
    catalog_density,
    cumulative,
    density_from_source,
    dual_measure,
    measures_from_elliptic,
)

UNIT = Interval(0.0, 1.0)
LINE = Interval(-math.inf, math.inf)


def measure(name, interval=UNIT):
    return WeightedMeasure(interval, catalog_density(name), name)


# Interval -----------------------------------------------------------------------


def test_interval_parse_and_reflect():
    iv = Interval.parse("-inf,2")
    assert iv.left == -math.inf and iv.right == 2.0
    assert iv.reflected() == Interval(-2.0, math.inf)
    assert iv.contains(0.0) and not iv.contains(2.0)


@pytest.mark.parametrize("text", ["1,0", "0,0", "0", "a,b"])
def test_interval_rejects_bad_text(text):
    with pytest.raises(ValueError):
        Interval.parse(text)


# cumulative ---------------------------------------------------------------------


def test_lebesgue_half():
    assert cumulative(measure("lebesgue"), 0.0, 0.5) == pytest.approx(0.5, rel=1e-12)


def test_empty_interval_is_zero():
    m = measure("power:-0.5")
    assert cumulative(m, 0.3, 0.3) == 0.0
    assert cumulative(m, 0.0, 0.0) == 0.0


def test_density_x_total_against_midpoint_rule():
    m = measure("power:1")
    n = 10 ** 6
    mid = (np.arange(n) + 0.5) / n
    oracle = float(np.sum(mid) / n)
    assert cumulative(m, 0.0, 1.0) == pytest.approx(oracle, rel=1e-10)
    assert cumulative(m, 0.0, 1.0) == pytest.approx(0.5, rel=1e-12)


@pytest.mark.parametrize("source, interval, f", [
    ("gauss", LINE, lambda x: math.exp(-x * x / 2)),
    ("power:-0.5", UNIT, lambda x: x ** -0.5),
    ("exp(-x)", Interval(0.0, math.inf), lambda x: math.exp(-x)),
    ("1/(1+x^2)", LINE, lambda x: 1 / (1 + x * x)),
    ("x^2*exp(-x)", Interval(1.0, math.inf), lambda x: x * x * math.exp(-x)),
])
def test_cumulative_against_scipy(source, interval, f):
    dens, label = density_from_source(source)
    m = WeightedMeasure(interval, dens, label)
    rng = np.random.default_rng(7)
    lo = max(interval.left, -8.0)
    hi = min(interval.right, 8.0)
    for a, b in np.sort(rng.uniform(lo, hi, size=(10, 2)), axis=1):
        want = integrate.quad(f, a, b, epsabs=0, epsrel=1e-12, limit=200)[0]
        assert cumulative(m, a, b) == pytest.approx(want, rel=1e-9, abs=1e-14)
    total = integrate.quad(f, interval.left, interval.right, epsabs=0, epsrel=1e-12, limit=200)[0]
    assert m.total_mass == pytest.approx(total, rel=1e-9)


@pytest.mark.parametrize("name, interval", [
    ("lebesgue", UNIT), ("power:-0.5", UNIT), ("power:1", UNIT), ("gauss", LINE),
])
def test_additivity_on_random_triples(name, interval):
    m = measure(name, interval)
    rng = np.random.default_rng(2024)
    if math.isinf(interval.left):
        pts = np.sort(rng.normal(scale=3.0, size=(1000, 3)), axis=1)
    else:
        pts = np.sort(rng.uniform(interval.left, interval.right, size=(1000, 3)), axis=1)
    a, b, c = pts.T
    lhs = m.cumulative(a, c)
    rhs = m.cumulative(a, b) + m.cumulative(b, c)
    assert np.all(np.abs(lhs - rhs) <= 10 * 1e-10 * np.abs(lhs) + 1e-14)
    assert np.all(m.cumulative(a, b) >= 0)


def test_divergent_total_is_flagged():
    m = WeightedMeasure(UNIT, lambda x: 1.0 / np.asarray(x), "1/x")
    assert m.total_mass == math.inf
    assert not m.is_finite
    assert math.isfinite(m.cumulative(0.5, 1.0))
    assert m.cumulative(0.5, 1.0) == pytest.approx(math.log(2), rel=1e-10)


def test_infinite_interval_lebesgue_diverges():
    m = measure("lebesgue", Interval(0.0, math.inf))
    assert m.total_mass == math.inf
    assert m.cumulative(0.0, 3.0) == pytest.approx(3.0, rel=1e-12)


def test_cumulative_argument_checks():
    m = measure("lebesgue")
    with pytest.raises(ValueError):
        m.cumulative(0.6, 0.5)
    with pytest.raises(ValueError):
        m.cumulative(-0.1, 0.5)


def test_negative_density_rejected():
    with pytest.raises(MeasureError):
        WeightedMeasure(UNIT, lambda x: np.asarray(x) - 0.5, "x - 1/2")


def test_undefined_density_rejected():
    dens, label = density_from_source("log(x - 0.5)")
    with pytest.raises(Exception):
        WeightedMeasure(UNIT, dens, label)


def test_concurrent_readers_agree():
    m = measure("gauss", LINE)
    t = np.linspace(-0.99, 0.99, 101)
    results = []

    def work():
        results.append(m.mass_t(-1.0, t))

    threads = [threading.Thread(target=work) for _ in range(8)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    for r in results[1:]:
        assert np.array_equal(r, results[0])


def test_scaled_and_reflected():
    m = measure("power:1")
    assert m.scaled(3.0).total_mass == pytest.approx(1.5, rel=1e-12)
    r = m.reflected()
    assert r.interval == Interval(-1.0, 0.0)
    assert r.cumulative(-1.0, -0.5) == pytest.approx(m.cumulative(0.5, 1.0), rel=1e-12)


# dual_measure -------------------------------------------------------------------


@pytest.mark.parametrize("p", [1.2, 1.5, 2.0, 3.0, 10.0])
def test_dual_of_lebesgue_is_lebesgue(p):
    d = dual_measure(measure("lebesgue"), p)
    x = np.linspace(0.01, 0.99, 50)
    assert np.all(d.density(x) == 1.0)
    assert d.total_mass == pytest.approx(1.0, rel=1e-12)


def test_dual_is_involution_at_p2():
    for src, iv in (("gauss", LINE), ("power:1", UNIT), ("2 + sin(5*x)", UNIT)):
        dens, label = density_from_source(src)
        nu = WeightedMeasure(iv, dens, label)
        back = dual_measure(dual_measure(nu, 2.0), 2.0)
        x = np.linspace(-3, 3, 97) if iv == LINE else np.linspace(0.01, 0.99, 97)
        np.testing.assert_allclose(back.density(x), nu.density(x), rtol=1e-12)


def test_dual_of_x_squared_at_p3():
    nu = WeightedMeasure(UNIT, lambda x: np.square(x), "x^2")
    d = dual_measure(nu, 3.0)
    x = np.linspace(0.05, 1.0, 20)
    np.testing.assert_allclose(d.density(x), 1.0 / x, rtol=1e-14)
    assert d.total_mass == math.inf
    assert cumulative(d, 0.0, 1.0) == math.inf


def test_dual_of_exponential_density_at_p2():
    nu = WeightedMeasure(UNIT, lambda x: np.exp(np.sin(3 * np.asarray(x))), "e^C")
    d = dual_measure(nu, 2.0)
    x = np.linspace(0, 1, 33)
    np.testing.assert_allclose(d.density(x), np.exp(-np.sin(3 * x)), rtol=1e-14)


@pytest.mark.parametrize("p", [1.0, 0.5, -2.0])
def test_dual_needs_p_above_one(p):
    with pytest.raises(ValueError):
        dual_measure(measure("lebesgue"), p)


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_dual_mass_against_scipy(p):
    d = dual_measure(measure("gauss", Interval(-2.0, 3.0)), p)
    want = integrate.quad(lambda x: math.exp(x * x / (2 * (p - 1))), -2.0, 3.0, epsrel=1e-12)[0]
    assert d.total_mass == pytest.approx(want, rel=1e-10)


# measures_from_elliptic ---------------------------------------------------------


def test_elliptic_constant_coefficients_give_lebesgue():
    mu, nu, nh = measures_from_elliptic(EllipticCoefficients("1", "0", 0.5), UNIT)
    x = np.linspace(0, 1, 21)
    for m in (mu, nu, nh):
        np.testing.assert_array_equal(m.density(x), np.ones_like(x))


def test_ou_densities():
    mu, nu, nh = measures_from_elliptic(EllipticCoefficients("1", "-x", 0.0), LINE)
    x = np.linspace(-6, 6, 121)
    np.testing.assert_allclose(mu.density(x), np.exp(-x * x / 2), rtol=1e-10)
    np.testing.assert_allclose(nu.density(x), np.exp(-x * x / 2), rtol=1e-10)
    np.testing.assert_allclose(nh.density(x), np.exp(x * x / 2), rtol=1e-10)
    assert mu.total_mass == pytest.approx(math.sqrt(2 * math.pi), rel=1e-10)


def test_potential_with_variable_diffusion():
    a, b = "1 + x^2", "-2*x"
    mu, nu, nh = measures_from_elliptic(EllipticCoefficients(a, b, 0.0), LINE)
    x = np.linspace(-5, 5, 41)
    # C(x) = -log(1 + x^2), so mu = (1 + x^2)^-2 and nu = (1 + x^2)^-1.
    np.testing.assert_allclose(nu.density(x), 1 / (1 + x * x), rtol=1e-10)
    np.testing.assert_allclose(mu.density(x), (1 + x * x) ** -2, rtol=1e-10)
    np.testing.assert_allclose(nh.density(x), 1 + x * x, rtol=1e-10)


def test_theta_shift_scales_densities():
    c0 = measures_from_elliptic(EllipticCoefficients("1", "-x", 0.0), LINE)
    c1 = measures_from_elliptic(EllipticCoefficients("1", "-x", 1.0), LINE)
    x = np.linspace(-4, 4, 33)
    # C_1(x) = C_0(x) - C_0(1) with C_0(1) = -1/2.
    np.testing.assert_allclose(c1[0].density(x), c0[0].density(x) * math.exp(0.5), rtol=1e-10)
    np.testing.assert_allclose(c1[2].density(x), c0[2].density(x) * math.exp(-0.5), rtol=1e-10)


@pytest.mark.parametrize("a, b, iv, thetas", [
    ("1", "-x", LINE, (0.0, 1.0, -2.0)),
    ("2 + cos(x)", "sin(3*x)", Interval(-1.0, 2.0), (0.0, 1.5)),
])
def test_product_invariant_under_theta(a, b, iv, thetas):
    rng = np.random.default_rng(11)
    lo, hi = max(iv.left, -3.0), min(iv.right, 3.0)
    pts = np.sort(rng.uniform(lo, hi, size=(20, 4)), axis=1)
    prods = []
    for th in thetas:
        mu, _, nh = measures_from_elliptic(EllipticCoefficients(a, b, th), iv)
        prods.append(mu.cumulative(pts[:, 0], pts[:, 1]) * nh.cumulative(pts[:, 2], pts[:, 3]))
    for other in prods[1:]:
        np.testing.assert_allclose(other, prods[0], rtol=1e-9)


def test_nonpositive_diffusion_rejected():
    with pytest.raises(MeasureError):
        measures_from_elliptic(EllipticCoefficients("x - 0.5", "0", 0.75), UNIT)
    with pytest.raises(MeasureError):
        measures_from_elliptic(EllipticCoefficients("-1", "0", 0.5), UNIT)


def test_theta_outside_interval_rejected():
    with pytest.raises(MeasureError):
        measures_from_elliptic(EllipticCoefficients("1", "0", 2.0), UNIT)
