import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsbgk.grid import PhaseGrid, SpatialGrid, VelocityGrid, integrate_v, integrate_x, integrate_xv, tree_sum


def test_spatial_grid_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        SpatialGrid(1, 48)


def test_velocity_nodes_are_cell_centred_and_symmetric():
    vg = VelocityGrid(1, 8, 4.0)
    assert vg.spacing == 1.0
    np.testing.assert_allclose(vg.axis, np.arange(-3.5, 4.0, 1.0))
    np.testing.assert_allclose(vg.axis, -vg.axis[::-1])


def test_integrate_v_of_constant_is_box_volume():
    grid = PhaseGrid.build(2, 4, 8, 3.0)
    g = np.full(grid.shape, 2.0)
    np.testing.assert_allclose(integrate_v(g, grid), 2.0 * 6.0**2)


def test_integrate_v_shape_mismatch():
    grid = PhaseGrid.build(1, 4, 8, 3.0)
    with pytest.raises(ValueError):
        integrate_v(np.zeros((4, 7)), grid)


def test_integrate_x_constant():
    sg = SpatialGrid(2, 8)
    assert math.isclose(integrate_x(np.full(sg.shape, 3.0), sg), 3.0 * (2 * math.pi) ** 2, rel_tol=1e-14)


def test_integrate_xv_carries_leading_axes():
    grid = PhaseGrid.build(1, 4, 8, 3.0)
    g = np.ones((2,) + grid.shape)
    g[1] *= 3
    np.testing.assert_allclose(integrate_xv(g, grid), [6.0 * 2 * math.pi, 18.0 * 2 * math.pi])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=300))
def test_tree_sum_matches_fsum(xs):
    a = np.array(xs)
    assert math.isclose(float(tree_sum(a, 1)), math.fsum(xs), rel_tol=1e-9, abs_tol=1e-6)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_tree_sum_is_order_deterministic(seed):
    a = np.random.default_rng(seed).standard_normal((16, 64))
    assert tree_sum(a.copy(), 1).tobytes() == tree_sum(a, 1).tobytes()


def test_integrate_v_unit_box_d1():
    grid = PhaseGrid.build(1, 2, 64, 4.0)
    np.testing.assert_allclose(integrate_v(np.ones(grid.shape), grid), 8.0, rtol=1e-15)
    assert np.all(integrate_v(np.zeros(grid.shape), grid) == 0)


def test_integrate_v_normalized_gaussian_d2():
    grid = PhaseGrid.build(2, 2, 64, 8.0)
    g = np.exp(-0.5 * grid.velocity.speed_squared) / (2 * math.pi)
    g = np.broadcast_to(g, grid.shape)
    np.testing.assert_allclose(integrate_v(g, grid), 1.0, atol=1e-10)


def test_integrate_x_trigonometric():
    sg = SpatialGrid(1, 16)
    x = sg.points[0]
    assert abs(integrate_x(np.sin(x), sg)) < 1e-12
    assert math.isclose(integrate_x(np.sin(x) ** 2, sg), math.pi, rel_tol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(-7, 7), st.integers(-7, 7), st.floats(0, 6.3))
def test_trigonometric_modes_integrate_exactly(k1, k2, phase):
    sg = SpatialGrid(2, 16)
    x = sg.points
    val = integrate_x(np.cos(k1 * x[0] + k2 * x[1] + phase), sg)
    exact = (2 * math.pi) ** 2 * math.cos(phase) if k1 == k2 == 0 else 0.0
    assert abs(val - exact) < 1e-11


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(-10, 10), st.floats(-10, 10))
def test_integrals_are_linear(seed, a, b):
    grid = PhaseGrid.build(1, 8, 16, 3.0)
    rng = np.random.default_rng(seed)
    g, h = rng.standard_normal((2,) + grid.shape)
    lhs = integrate_v(a * g + b * h, grid)
    rhs = a * integrate_v(g, grid) + b * integrate_v(h, grid)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * (abs(a) + abs(b) + 1) * 16)
