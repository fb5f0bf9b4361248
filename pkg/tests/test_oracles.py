import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from nsbgk import oracles

# frozen reference values
TG_AMPLITUDE = 0.8187307530779818  # exp(-0.2)
BALL_3D_K1 = math.pi  # 3 * (4 pi / 3) / 4


def test_gaussian_moments_frozen():
    assert oracles.gaussian_moments(1, 0, 1, 3) == {"m0": 1, "m1": [0, 0, 0], "m2": 3}
    assert oracles.gaussian_moments(2, 0.5, 2, 1)["m2"] == 2 * (0.25 + 2)


def test_taylor_green_frozen():
    assert oracles.taylor_green(0.1, 1.0)["amplitude"] == TG_AMPLITUDE


def test_ball_moment_frozen():
    assert math.isclose(oracles.ball_moments(1, 3)["value"], BALL_3D_K1, rel_tol=1e-15)
    assert math.isclose(oracles.ball_moments(0, 1)["value"], 2.0, rel_tol=1e-15)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_lemma_constant_scan_agrees(d):
    r = oracles.lemma_constant(d)
    assert math.isclose(r["closed_form"], r["radius_scan"], rel_tol=1e-6)


def test_mixture_temperature():
    r = oracles.mixture_moments(0.5, 2.0, 1.0, 1)
    assert r["m1"] == [0.0] and r["T"] == 5.0


def test_bgk_homogeneous_endpoints():
    r = oracles.bgk_homogeneous(0.0, 2.0, 1.0, 0.7)
    assert r["f"] == r["f0"]
    r = oracles.bgk_homogeneous(50.0, 2.0, 1.0, 0.7)
    assert math.isclose(r["f"], r["M"], rel_tol=1e-15)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.3, 3.0))
def test_gaussian_entropy_matches_quadrature(rho, T):
    def integrand(v):
        g = rho * math.exp(-v * v / (2 * T)) / math.sqrt(2 * math.pi * T)
        return g * math.log(g) if g > 0 else 0.0

    lim = 40 * math.sqrt(T)
    num, _ = integrate.quad(integrand, -lim, lim, epsabs=1e-13, limit=200)
    assert math.isclose(oracles.gaussian_entropy(rho, T, 1)["H"], num, rel_tol=1e-8, abs_tol=1e-10)


def test_cutoff_mass_bounds():
    full = math.erf(1 / (0.25 * math.sqrt(2)))
    inner = math.erf(0.5 / (0.25 * math.sqrt(2)))
    val = oracles.cutoff_mass(0.25, 1.0)["value"]
    assert inner < val < full
