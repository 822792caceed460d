import math

import mpmath as mp
import numpy as np
import pytest

from hardybounds.bounds import kappa0, two_sided
from hardybounds.catalog import catalog_setup
from hardybounds.oracle import OracleError, oracle_ergodic_nonlinear, oracle_linear, oracle_nonlinear

LINEAR_CASES = [
    ("lebesgue", "ergodic"), ("lebesgue", "dirichlet_left"), ("lebesgue", "dirichlet_both"),
    ("power:-0.5", "ergodic"), ("power:-0.5", "dirichlet_left"), ("power:-0.5", "dirichlet_right"),
    ("power:-0.5", "dirichlet_both"), ("power:1", "ergodic"), ("power:1", "dirichlet_right"),
    ("power:1", "dirichlet_both"), ("gauss", "ergodic"), ("ou", "ergodic"),
]


def mp_exact_A(p, q):
    p, q = mp.mpf(p), mp.mpf(q)
    num = p ** (1 / q) * q ** (1 - 1 / p) * (p * q + p - q) ** (1 / p - 1 / q)
    return float(num / ((p - 1) ** (1 / p) * mp.beta(1 / q, 1 - 1 / p)))


# Linear eigen-solver --------------------------------------------------------------


def test_linear_lebesgue_ergodic():
    r = oracle_linear(catalog_setup("lebesgue", 2, 2, "ergodic"), n=4096)
    assert r.A_estimate == pytest.approx(1 / math.pi, abs=1e-4)
    assert r.method == "linear_eig" and r.converged and r.grid_size == 4096


def test_linear_lebesgue_ergodic_richardson():
    lam = [oracle_linear(catalog_setup("lebesgue", 2, 2, "ergodic"), n=n).eigenvalue for n in (256, 512, 1024)]
    extrap = lam[2] + (lam[2] - lam[1]) / 3
    assert extrap == pytest.approx(math.pi ** 2, rel=1e-6)


def test_linear_lebesgue_dirichlet_left():
    r = oracle_linear(catalog_setup("lebesgue", 2, 2, "dirichlet_left"), n=4096)
    assert r.A_estimate == pytest.approx(2 / math.pi, abs=1e-4)


def test_linear_lebesgue_dirichlet_both():
    s = catalog_setup("lebesgue", 2, 2, "dirichlet_both")
    r = oracle_linear(s, n=4096)
    assert r.A_estimate == pytest.approx(1 / math.pi, abs=1e-4)
    k0 = kappa0(s)
    assert k0 == pytest.approx(0.25, abs=1e-9)
    assert k0 <= r.A_estimate <= 2 * k0


def test_linear_gaussian_spectral_gap():
    # The Ornstein-Uhlenbeck generator has spectral gap 1, so A = 1.
    r = oracle_linear(catalog_setup("gauss", 2, 2, "ergodic"), n=8192)
    assert r.A_estimate == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("name, boundary", LINEAR_CASES)
def test_mesh_convergence_is_monotone(name, boundary):
    s = catalog_setup(name, 2, 2, boundary)
    a = [oracle_linear(s, n=n).A_estimate for n in (256, 512, 1024, 2048, 4096, 8192)]
    diffs = [abs(x - y) for x, y in zip(a, a[1:])]
    assert all(d1 > d2 for d1, d2 in zip(diffs, diffs[1:])), diffs
    # Richardson extrapolation for an O(n^-2) error is stable.
    e1 = a[-1] + (a[-1] - a[-2]) / 3
    e2 = a[-2] + (a[-2] - a[-3]) / 3
    assert e1 == pytest.approx(e2, abs=1e-4)


@pytest.mark.parametrize("name, boundary", LINEAR_CASES)
def test_rayleigh_matches_eigenvalue(name, boundary):
    r = oracle_linear(catalog_setup(name, 2, 2, boundary), n=4096)
    assert r.converged
    assert abs(r.rayleigh - r.eigenvalue) <= 1e-8 * r.eigenvalue
    assert r.A_estimate > 0


def test_linear_is_deterministic():
    s = catalog_setup("power:1", 2, 2, "ergodic")
    assert oracle_linear(s, n=1024) == oracle_linear(s, n=1024)


def test_linear_needs_p_q_two():
    with pytest.raises(ValueError):
        oracle_linear(catalog_setup("lebesgue", 2, 3, "ergodic"))


def test_grid_size_lower_limit():
    with pytest.raises(ValueError):
        oracle_linear(catalog_setup("lebesgue", 2, 2, "ergodic"), n=8)


@pytest.mark.parametrize("name, boundary", [("power:1", "dirichlet_left"), ("gauss", "dirichlet_left"),
                                            ("gauss", "dirichlet_both")])
def test_void_dirichlet_end(name, boundary):
    with pytest.raises(OracleError):
        oracle_linear(catalog_setup(name, 2, 2, boundary), n=512)


def test_dirichlet_both_drops_one_void_end():
    s = catalog_setup("power:1", 2, 2, "dirichlet_both")
    both = oracle_linear(s, n=2048)
    right = oracle_linear(catalog_setup("power:1", 2, 2, "dirichlet_right"), n=2048)
    assert both.A_estimate == right.A_estimate
    assert any("void" in n for n in both.notes)


# Nonlinear iteration --------------------------------------------------------------


def test_nonlinear_22():
    r = oracle_nonlinear(catalog_setup("lebesgue", 2, 2, "dirichlet_left"), n=4096)
    assert r.A_estimate == pytest.approx(2 / math.pi, abs=1e-4)
    assert r.method == "nonlinear_iter"


@pytest.mark.parametrize("p, q", [(3.0, 3.0), (2.0, 4.0), (5.0, 5.0), (1.5, 3.0)])
def test_nonlinear_reproduces_exact(p, q):
    r = oracle_nonlinear(catalog_setup("lebesgue", p, q, "dirichlet_left"), n=4096)
    assert r.A_estimate == pytest.approx(mp_exact_A(p, q), abs=1e-3)
    if r.converged:
        assert r.residual <= 1e-8


def test_nonlinear_33_value():
    want = 3 * math.sin(math.pi / 3) / (math.pi * 2 ** (1 / 3))
    # The quoted approximation 0.6561 is good to about 3e-4; the expression is 0.656385.
    assert want == pytest.approx(0.6561, abs=5e-4)
    r = oracle_nonlinear(catalog_setup("lebesgue", 3, 3, "dirichlet_left"), n=4096)
    assert r.A_estimate == pytest.approx(want, abs=1e-3)


def test_nonlinear_right_end_by_mirror():
    s = catalog_setup("power:-0.5", 2, 3, "dirichlet_right")
    r = oracle_nonlinear(s, n=2048)
    rep = two_sided(s)
    assert rep.lower_A - 1e-6 <= r.A_estimate <= rep.upper_A + 1e-6
    assert any("mirror" in n for n in r.notes)


def test_nonlinear_q_below_p_is_lower_bound():
    r = oracle_nonlinear(catalog_setup("lebesgue", 3, 2, "dirichlet_left"), n=1024)
    assert r.lower_bound_only
    assert r.A_estimate <= mp_exact_A(3, 2) + 1e-6


def test_nonlinear_needs_one_sided_boundary():
    with pytest.raises(ValueError):
        oracle_nonlinear(catalog_setup("lebesgue", 2, 2, "ergodic"))


# Ergodic ascent -------------------------------------------------------------------


def test_ergodic_nonlinear_lebesgue():
    s = catalog_setup("lebesgue", 2, 2, "ergodic")
    r = oracle_ergodic_nonlinear(s, n=1024)
    assert r.A_estimate == pytest.approx(1 / math.pi, abs=1e-3)
    assert 0.25 <= r.A_estimate <= 0.5


@pytest.mark.parametrize("name", ["lebesgue", "power:-0.5", "power:1", "gauss", "ou"])
def test_methods_agree(name):
    s = catalog_setup(name, 2, 2, "ergodic")
    lin = oracle_linear(s, n=1024)
    non = oracle_ergodic_nonlinear(s, n=1024)
    assert non.A_estimate == pytest.approx(lin.A_estimate, abs=1e-3)


def test_ergodic_nonlinear_general_exponents_in_sandwich():
    s = catalog_setup("lebesgue", 1.5, 3.0, "ergodic")
    r = oracle_ergodic_nonlinear(s, n=1024)
    rep = two_sided(s)
    assert rep.lower_A - 1e-6 <= r.A_estimate <= rep.upper_A + 1e-6


def test_ergodic_nonlinear_needs_ergodic():
    with pytest.raises(ValueError):
        oracle_ergodic_nonlinear(catalog_setup("lebesgue", 2, 2, "dirichlet_left"))
