import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsbgk import oracles
from nsbgk.fields import DistributionField, FluidField, norm_lp
from nsbgk.grid import PhaseGrid, SpatialGrid
from nsbgk.initial import gaussian, taylor_green
from nsbgk.mollifier import (
    CutoffFunction,
    MollifierKernel,
    cutoff_profile,
    cutoff_weighted_moments,
    mollify,
    regularize_initial_data,
)

SG = SpatialGrid(2, 32)


@pytest.mark.parametrize("eps", [0.3, 0.5, 1.0])
def test_kernel_normalized_and_nonnegative(eps):
    k = MollifierKernel.bump(SG, eps)
    assert math.isclose(k.fourier_symbol[0, 0], 1.0, rel_tol=1e-14)
    real = k.real_space()
    assert real.min() > -1e-10
    assert math.isclose(real.sum() * SG.cell_volume, 1.0, rel_tol=1e-12)


def test_kernel_below_grid_spacing_is_identity():
    k = MollifierKernel.bump(SG, 0.5 * SG.spacing)
    np.testing.assert_allclose(k.fourier_symbol, 1.0, atol=1e-14)


def test_kernel_rejects_nonpositive_epsilon():
    with pytest.raises(ValueError):
        MollifierKernel.bump(SG, 0.0)


def test_mollify_keeps_constants_and_contracts():
    k = MollifierKernel.bump(SG, 0.4)
    c = FluidField(SG, np.ones((2,) + SG.shape))
    np.testing.assert_allclose(mollify(c, k).values, 1.0, atol=1e-13)
    rng = np.random.default_rng(0)
    u = FluidField(SG, rng.standard_normal((2,) + SG.shape))
    assert norm_lp(mollify(u, k), 2) <= norm_lp(u, 2) * (1 + 1e-12)


def test_mollify_grid_mismatch():
    k = MollifierKernel.bump(SpatialGrid(2, 16), 0.4)
    with pytest.raises(ValueError):
        mollify(FluidField.zeros(SG), k)


def test_taylor_green_is_an_eigenfunction():
    k = MollifierKernel.bump(SG, 0.4)
    u = taylor_green(SG)
    out = k.apply(u)
    big = np.abs(u[0]) > 1e-3
    scale = out[0][big] / u[0][big]
    np.testing.assert_allclose(scale, scale[0], rtol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.5))
def test_cutoff_sandwich(eps):
    vg = PhaseGrid.build(2, 2, 32, 1.0 / eps).velocity
    gamma = CutoffFunction.smooth(vg, eps).samples
    r = vg.speed
    assert np.all(gamma[r <= 0.5 / eps] == 1.0)
    assert np.all(gamma[r >= 1.0 / eps] == 0.0)
    assert np.all((0 <= gamma) & (gamma <= 1))


def test_cutoff_profile_midpoint():
    assert math.isclose(float(cutoff_profile(0.75 / 0.2, 0.2)), 0.5, rel_tol=1e-14)


def test_cutoff_weighted_moments_brackets_and_oracle():
    grid = PhaseGrid.build(1, 2, 256, 8.0)
    f = DistributionField(grid, gaussian(grid, 1.0, np.zeros(1), 1.0))
    eps = 0.25
    m0, m1 = cutoff_weighted_moments(f, CutoffFunction.smooth(grid.velocity, eps))
    assert math.erf(2 / math.sqrt(2)) < m0[0] < 1.0
    assert math.isclose(m0[0], oracles.cutoff_mass(eps)["value"], rel_tol=1e-6)
    np.testing.assert_allclose(m1, 0.0, atol=1e-14)


def test_cutoff_one_gives_plain_moments():
    grid = PhaseGrid.build(1, 4, 64, 8.0)
    f = DistributionField(grid, gaussian(grid, 2.0, np.array([0.5]), 1.0))
    m0, m1 = cutoff_weighted_moments(f, CutoffFunction.one(grid.velocity))
    np.testing.assert_allclose(m0, 2.0, rtol=1e-10)
    np.testing.assert_allclose(m1[0], 1.0, rtol=1e-10)


def test_regularized_data():
    grid = PhaseGrid.build(2, 16, 16, 10.0)
    rng = np.random.default_rng(2)
    f0 = DistributionField(grid, rng.uniform(0, 20, size=grid.shape))
    u0 = FluidField(grid.spatial, rng.standard_normal((2,) + grid.spatial.shape))
    eps = 0.1
    f, u = regularize_initial_data(f0, u0, eps)
    floor = eps * np.exp(-grid.velocity.speed_squared)
    assert np.all(f.values >= floor - 1e-15)
    assert f.values.max() <= 1 / eps + floor.max() + 1e-9
    assert u.divergence_max() < 1e-10


def test_mollified_sine_matches_real_space_quadrature():
    sg = SpatialGrid(1, 64)
    eps = 0.5
    k = MollifierKernel.bump(sg, eps)
    x = sg.points[0]
    u = FluidField(sg, np.sin(x)[None])
    out = mollify(u, k).values[0]
    # direct convolution with the sampled, normalized bump
    y = (np.arange(64) - 32) * sg.spacing
    r = np.abs(y) / eps
    eta = np.where(r < 1, np.exp(-1 / np.maximum(1 - r**2, 1e-300)), 0.0)
    eta /= eta.sum()
    direct = np.array([np.sum(eta * np.sin(xi - y)) for xi in x])
    np.testing.assert_allclose(out, direct, atol=1e-13)
    np.testing.assert_allclose(out, k.fourier_symbol[1] * np.sin(x), atol=1e-13)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.2, 1.5))
def test_mollify_self_adjoint_and_contracting(seed, eps):
    from nsbgk.fields import inner

    k = MollifierKernel.bump(SG, eps)
    rng = np.random.default_rng(seed)
    u = FluidField(SG, rng.standard_normal((2,) + SG.shape))
    w = FluidField(SG, rng.standard_normal((2,) + SG.shape))
    a = inner(mollify(u, k), w)
    b = inner(u, mollify(w, k))
    assert abs(a - b) <= 1e-11 * norm_lp(u, 2) * norm_lp(w, 2)
    for p in (1, 2, math.inf):
        assert norm_lp(mollify(u, k), p) <= norm_lp(u, p) * (1 + 1e-12)


def test_regularized_zero_is_the_floor():
    grid = PhaseGrid.build(1, 16, 32, 10.0)
    f, u = regularize_initial_data(DistributionField.zeros(grid), FluidField.zeros(grid.spatial), 0.2)
    expected = np.broadcast_to(0.2 * np.exp(-grid.velocity.speed_squared), grid.shape)
    assert np.array_equal(f.values, expected)
    assert np.all(u.values == 0)


def test_regularization_converges_as_eps_shrinks():
    grid = PhaseGrid.build(2, 64, 16, 10.0)
    x = grid.spatial.points
    U = np.zeros((2,) + grid.spatial.shape)
    U[0] = 0.5 * np.sin(x[1])
    f0 = DistributionField(grid, gaussian(grid, 1 + 0.3 * np.cos(x[0]), U, 1.0))
    u0 = FluidField(grid.spatial, taylor_green(grid.spatial))
    f_err, u_err = [], []
    for eps in (0.2, 0.1, 0.05):
        f, u = regularize_initial_data(f0, u0, eps)
        assert f.values.max() <= f0.values.max() + eps * (1 + 1e-12)
        f_err.append(norm_lp(f.replace(f.values - f0.values), 1))
        u_err.append(norm_lp(u.replace(u.values - u0.values), 2))
    assert f_err[0] > f_err[1] > f_err[2]
    assert u_err[0] > u_err[1] > u_err[2]
