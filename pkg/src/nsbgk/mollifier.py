"""Regularization operators: spatial mollifier, velocity cut-off, regularized data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .fields import DistributionField, FluidField, divergence_free_project
from .grid import PhaseGrid, SpatialGrid, VelocityGrid, integrate_v


@dataclass(frozen=True, eq=False)
class MollifierKernel:
    epsilon: float
    grid: SpatialGrid
    fourier_symbol: np.ndarray

    @classmethod
    def bump(cls, grid: SpatialGrid, epsilon: float) -> "MollifierKernel":
        """Sampled bump ``exp(-1/(1 - |x/eps|^2))`` normalized so its grid sum is one.

        When epsilon is below the grid spacing only the origin carries weight
        and the kernel reduces to the identity.
        """
        if not epsilon > 0:
            raise ValueError("epsilon must be positive")
        L = grid.domain_length
        # minimal-image distance to the origin on the torus
        x = grid.points
        x = np.where(x > L / 2, x - L, x)
        r2 = np.sum(x**2, axis=0) / epsilon**2
        eta = np.zeros(grid.shape)
        inside = r2 < 1.0
        eta[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
        eta /= np.sum(eta) * grid.cell_volume
        sym = spectral.fft(eta, grid.dim) * grid.cell_volume
        if np.max(np.abs(sym.imag)) > 1e-14:
            raise ValueError("mollifier symbol is not real")
        return cls(epsilon, grid, sym.real.copy())

    @classmethod
    def identity(cls, grid: SpatialGrid) -> "MollifierKernel":
        return cls(0.0, grid, np.ones(grid.shape))

    def real_space(self) -> np.ndarray:
        return spectral.ifft(self.fourier_symbol.astype(complex), self.grid.dim) / self.grid.cell_volume

    def apply(self, values: np.ndarray) -> np.ndarray:
        d = self.grid.dim
        return spectral.ifft(spectral.fft(values, d) * self.fourier_symbol, d)


def mollify(u: FluidField, k: MollifierKernel) -> FluidField:
    if u.grid != k.grid:
        raise ValueError("kernel was built for a different grid")
    return FluidField(u.grid, k.apply(u.values))


def smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


@dataclass(frozen=True, eq=False)
class CutoffFunction:
    epsilon: float
    samples: np.ndarray

    @classmethod
    def smooth(cls, vgrid: VelocityGrid, epsilon: float) -> "CutoffFunction":
        """1 on |v| <= 1/(2 eps), 0 on |v| >= 1/eps, quintic smoothstep between."""
        if not epsilon > 0:
            raise ValueError("epsilon must be positive")
        return cls(epsilon, cutoff_profile(vgrid.speed, epsilon))

    @classmethod
    def one(cls, vgrid: VelocityGrid) -> "CutoffFunction":
        return cls(0.0, np.ones(vgrid.shape))


def cutoff_profile(r, epsilon: float):
    return 1.0 - smoothstep(2.0 * epsilon * np.asarray(r) - 1.0)


def cutoff_weighted_moments(f: DistributionField, gamma: CutoffFunction):
    """(int gamma f dv, int gamma v f dv) per spatial cell."""
    grid = f.grid
    d = grid.dim
    gf = gamma.samples.reshape((1,) * d + grid.velocity.shape) * f.values
    m0 = integrate_v(gf, grid)
    v = grid.velocity.points.reshape((d,) + (1,) * d + grid.velocity.shape)
    m1 = integrate_v(v * gf, grid)
    return m0, m1


def regularize_initial_data(f0: DistributionField, u0: FluidField, epsilon: float, kernel=None):
    """Truncate f0 at 1/eps, mollify in x, add the floor eps*exp(-|v|^2); mollify P(u0)."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    grid = f0.grid
    d = grid.dim
    if kernel is None:
        kernel = MollifierKernel.bump(grid.spatial, epsilon)
    truncated = np.where(f0.values < 1.0 / epsilon, f0.values, 0.0)
    # mollify along the spatial axes, independently for every velocity node
    moved = np.moveaxis(truncated, tuple(range(d)), tuple(range(truncated.ndim - d, truncated.ndim)))
    smoothed = kernel.apply(moved)
    smoothed = np.moveaxis(smoothed, tuple(range(smoothed.ndim - d, smoothed.ndim)), tuple(range(d)))
    floor = epsilon * np.exp(-grid.velocity.speed_squared)
    f_eps = np.maximum(smoothed, 0.0) + floor.reshape((1,) * d + grid.velocity.shape)
    u_eps = mollify(divergence_free_project(u0), kernel)
    return DistributionField(grid, f_eps), u_eps
