import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsbgk.fields import DistributionField, FluidField, divergence_free_project, inner, norm_linf_q, norm_lp
from nsbgk.grid import PhaseGrid, SpatialGrid

GRID = PhaseGrid.build(1, 8, 16, 4.0)
SG2 = SpatialGrid(2, 16)


def test_distribution_shape_checked():
    with pytest.raises(ValueError):
        DistributionField(GRID, np.zeros((8, 8)))


def test_invariants_reject_negative_and_nan():
    f = DistributionField(GRID, -np.ones(GRID.shape))
    with pytest.raises(ValueError):
        f.check_invariants()
    f = DistributionField(GRID, np.full(GRID.shape, np.nan))
    with pytest.raises(ValueError):
        f.check_invariants()


def test_norm_p_below_one_rejected():
    with pytest.raises(ValueError):
        norm_lp(DistributionField.zeros(GRID), 0.5)


def test_norms_of_constant():
    f = DistributionField(GRID, np.full(GRID.shape, 2.0))
    vol = 2 * math.pi * 8.0
    assert math.isclose(norm_lp(f, 1), 2.0 * vol)
    assert math.isclose(norm_lp(f, 2), 2.0 * math.sqrt(vol))
    assert norm_lp(f, math.inf) == 2.0


def test_vector_norm_uses_euclidean_magnitude():
    u = FluidField(SG2, np.stack([np.full(SG2.shape, 3.0), np.full(SG2.shape, 4.0)]))
    assert norm_lp(u, math.inf) == 5.0


def test_linf_q_weight():
    vals = np.zeros(GRID.shape)
    vals[0, -1] = 1.0
    v = GRID.velocity.axis[-1]
    assert math.isclose(norm_linf_q(DistributionField(GRID, vals), 6), 1 + v**6)
    assert norm_linf_q(DistributionField(GRID, vals), 0) == 1.0


def _random_velocity(seed):
    rng = np.random.default_rng(seed)
    return FluidField(SG2, rng.standard_normal((2,) + SG2.shape))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_projection_is_idempotent_and_keeps_mean(seed):
    u = _random_velocity(seed)
    p = divergence_free_project(u)
    pp = divergence_free_project(p)
    np.testing.assert_allclose(pp.values, p.values, atol=1e-12)
    np.testing.assert_allclose(p.values.mean(axis=(1, 2)), u.values.mean(axis=(1, 2)), atol=1e-13)
    assert p.divergence_max() < 1e-10
    p.check_invariants()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_projection_is_orthogonal(seed):
    u = _random_velocity(seed)
    p = divergence_free_project(u)
    rest = u.replace(u.values - p.values)
    assert abs(inner(p, rest)) < 1e-9 * norm_lp(u, 2) ** 2


def test_l1_of_gaussian_d3():
    from nsbgk.initial import gaussian

    grid = PhaseGrid.build(3, 2, 32, 8.0)
    f = DistributionField(grid, gaussian(grid, 1.0, np.zeros(3), 1.0))
    assert math.isclose(norm_lp(f, 1), (2 * math.pi) ** 3, rel_tol=1e-9)


def test_linf_q_maximum_at_unit_speed():
    # dv = 2/3 puts a node at v = 1, where (1 + v^2) exp(-v^2/2) peaks
    grid = PhaseGrid.build(1, 2, 16, 16 / 3)
    f = DistributionField(grid, np.broadcast_to(np.exp(-0.5 * grid.velocity.axis**2), grid.shape).copy())
    assert math.isclose(norm_linf_q(f, 2), 2 * math.exp(-0.5), rel_tol=1e-14)
    assert norm_lp(DistributionField.zeros(grid), 1) == 0 == norm_linf_q(DistributionField.zeros(grid), 6)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([0.0, 2.0, 6.0]))
def test_linf_q_monotone(seed, q):
    rng = np.random.default_rng(seed)
    f = rng.random(GRID.shape)
    g = f + rng.random(GRID.shape)
    assert norm_linf_q(DistributionField(GRID, f), q) <= norm_linf_q(DistributionField(GRID, g), q)


def test_projection_examples():
    x = SG2.points
    grad = np.stack([np.cos(x[0]), np.zeros(SG2.shape)])  # gradient of sin x1
    assert np.max(np.abs(divergence_free_project(FluidField(SG2, grad)).values)) < 1e-13
    shear = np.stack([np.sin(x[1]), np.zeros(SG2.shape)])
    np.testing.assert_allclose(divergence_free_project(FluidField(SG2, shear)).values, shear, atol=1e-13)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_projection_is_self_adjoint(seed):
    u, w = _random_velocity(seed), _random_velocity(seed + 1)
    a = inner(divergence_free_project(u), w)
    b = inner(u, divergence_free_project(w))
    assert abs(a - b) <= 1e-11 * norm_lp(u, 2) * norm_lp(w, 2)
