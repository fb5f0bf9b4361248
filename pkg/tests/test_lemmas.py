import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsbgk import oracles
from nsbgk.fields import DistributionField
from nsbgk.grid import PhaseGrid, integrate_v
from nsbgk.initial import gaussian
from nsbgk.lemmas import (
    ball_volume,
    check_lemma_rho_T,
    check_maxwellian_domination,
    check_moment_interpolation,
    maxwellian_domination_ratio,
    rho_T_constant,
)
from nsbgk.validation import random_field

G1 = PhaseGrid.build(1, 4, 64, 8.0)
G3 = PhaseGrid.build(3, 2, 24, 6.0)



@pytest.mark.parametrize("d", [1, 2, 3])
def test_rho_T_constant_matches_radius_scan(d):
    ref = oracles.lemma_constant(d)
    assert math.isclose(rho_T_constant(d), ref["closed_form"], rel_tol=1e-14)
    assert math.isclose(ref["closed_form"], ref["radius_scan"], rel_tol=1e-6)


def test_rho_T_constant_frozen_values():
    assert math.isclose(rho_T_constant(1), 3 * math.sqrt(3), rel_tol=1e-14)
    assert math.isclose(rho_T_constant(2), 8 * math.pi, rel_tol=1e-14)
    assert math.isclose(rho_T_constant(3), 4 / 3 * math.pi * 2**1.5 * 2.5**2.5, rel_tol=1e-14)


def test_rho_T_maxwellian_d3():
    f = DistributionField(G3, gaussian(G3, 1.0, np.zeros(3), 1.0))
    lhs, rhs, ok = check_lemma_rho_T(f, 0)
    # analytic rho = T = 1; the sup norm is the largest sample, off the centre by half a cell
    assert ok
    assert math.isclose(lhs, 1.0, rel_tol=1e-6)
    assert math.isclose(rhs, rho_T_constant(3) * f.values.max(), rel_tol=1e-5)
    assert lhs / rhs <= 1


def test_rho_T_zero_field():
    assert check_lemma_rho_T(DistributionField.zeros(G1), 6) == (0.0, 0.0, True)


@pytest.mark.parametrize("q", [1.0, 3.0, -1.0])
def test_rho_T_domain(q):
    with pytest.raises(ValueError):
        check_lemma_rho_T(DistributionField.zeros(G1), q)


@pytest.mark.parametrize("q", [1.0, 5.0])
def test_domination_domain(q):
    with pytest.raises(ValueError):
        check_maxwellian_domination(DistributionField.zeros(G1), q)


def test_domination_maxwellian_ratio_one():
    f = DistributionField(G1, gaussian(G1, 1.0, np.array([0.5]), 1.0))
    assert math.isclose(maxwellian_domination_ratio(f, 6.0), 1.0, rel_tol=1e-8)
    assert check_maxwellian_domination(f, 6.0)[2]


def test_domination_zero_vacuous():
    assert check_maxwellian_domination(DistributionField.zeros(G1), 0.0) == (0.0, 0.0, True)


def test_domination_bimodal_finite():
    e = np.array([2.5])
    f = DistributionField(G1, 0.5 * gaussian(G1, 1.0, e, 0.5) + 0.5 * gaussian(G1, 1.0, -e, 0.5))
    lhs, rhs, ok = check_maxwellian_domination(f, 6.0)
    assert math.isfinite(lhs) and ok


def test_moment_interpolation_ball_d3():
    ind = (G3.velocity.speed <= 1.0).astype(float)
    f = DistributionField(G3, np.broadcast_to(ind, G3.shape).copy())
    lhs, rhs, ok = check_moment_interpolation(f, 1, 2)
    assert ok
    # quadrature of the sampled ball against the closed form pi
    assert math.isclose(lhs, oracles.ball_moments(1, 3)["value"], rel_tol=0.1)


def test_moment_interpolation_domain():
    with pytest.raises(ValueError):
        check_moment_interpolation(DistributionField.zeros(G1), 2, 2)


def test_moment_interpolation_zero():
    assert check_moment_interpolation(DistributionField.zeros(G1), 1, 2) == (0.0, 0.0, True)


def test_ball_volume():
    assert math.isclose(ball_volume(3), 4 / 3 * math.pi)
    assert math.isclose(ball_volume(2), math.pi)
    assert math.isclose(ball_volume(1), 2.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_lemmas_hold_on_random_fields(seed):
    f = random_field(G1, np.random.default_rng(seed))
    assert check_lemma_rho_T(f, 0)[2]
    assert check_lemma_rho_T(f, 6)[2]
    for a, b in ((1, 2), (2, 3), (0, 1.5)):
        assert check_moment_interpolation(f, a, b)[2]
    assert math.isfinite(maxwellian_domination_ratio(f, 6.0))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(-2.0, 2.0), st.floats(0.1, 5.0))
def test_rho_T_gaussians_have_fixed_ratio(T, U, rho):
    # for a Gaussian rho / (||f|| T^(1/2)) = sqrt(2 pi), far below the constant
    f = DistributionField(G1, gaussian(G1, rho, np.array([U]), T))
    lhs, rhs, ok = check_lemma_rho_T(f, 0)
    assert ok
    assert lhs / rhs < math.sqrt(2 * math.pi) / rho_T_constant(1) * 1.05
    # box truncation at v_max = 8 costs up to ~1e-5 of the mass for T = 3
    assert math.isclose(float(integrate_v(f.values, G1)[0]), rho, rel_tol=1e-4)
