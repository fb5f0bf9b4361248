"""Kinetic and fluid unknowns, and the norms used on them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .grid import PhaseGrid, SpatialGrid, integrate_x, integrate_xv

DIVERGENCE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DistributionField:
    """Phase-space density ``f(x, v)``; values have shape ``grid.shape``.

    Storage is x-major then v, so velocity integrals reduce the trailing,
    contiguous axes.
    """

    grid: PhaseGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} != grid shape {self.grid.shape}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, grid: PhaseGrid) -> "DistributionField":
        return cls(grid, np.zeros(grid.shape))

    def check_invariants(self) -> None:
        if not np.all(np.isfinite(self.values)):
            raise ValueError("distribution has non-finite values")
        if np.any(self.values < 0):
            raise ValueError("distribution has negative values")

    def replace(self, values) -> "DistributionField":
        return DistributionField(self.grid, values)


@dataclass(frozen=True, eq=False)
class FluidField:
    """Velocity field ``u(x)``; values have shape ``(dim, *grid.shape)``."""

    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        expected = (self.grid.dim,) + self.grid.shape
        if vals.shape != expected:
            raise ValueError(f"values shape {vals.shape} != {expected}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, grid: SpatialGrid) -> "FluidField":
        return cls(grid, np.zeros((grid.dim,) + grid.shape))

    def divergence_max(self) -> float:
        wn = spectral.wavenumbers(self.grid)
        div = spectral.divergence_hat(spectral.fft(self.values, self.grid.dim), wn)
        return float(np.max(np.abs(spectral.ifft(div, self.grid.dim))))

    def check_invariants(self) -> None:
        if not np.all(np.isfinite(self.values)):
            raise ValueError("fluid field has non-finite values")
        scale = norm_lp(self, 2)
        if self.divergence_max() > DIVERGENCE_TOL * max(scale, 1e-300):
            raise ValueError("fluid field is not divergence-free")

    def replace(self, values) -> "FluidField":
        return FluidField(self.grid, values)


def norm_lp(field, p: float) -> float:
    """Discrete L^p norm; vector fields use the pointwise Euclidean magnitude."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if isinstance(field, DistributionField):
        a = np.abs(field.values)
        integrate = lambda g: integrate_xv(g, field.grid)
    elif isinstance(field, FluidField):
        a = np.sqrt(np.sum(field.values**2, axis=0))
        integrate = lambda g: integrate_x(g, field.grid)
    else:
        raise TypeError(f"unsupported field type {type(field).__name__}")
    if np.isinf(p):
        return float(np.max(a)) if a.size else 0.0
    if p == 1:
        return float(integrate(a))
    return float(integrate(a**p)) ** (1.0 / p)


def linf_q_weight(grid: PhaseGrid, q: float) -> np.ndarray:
    return 1.0 + grid.velocity.speed**q


def norm_linf_q(f, q: float) -> float:
    """Weighted sup norm ``max (1 + |v|^q) |f|`` over the grid."""
    if q < 0:
        raise ValueError("q must be >= 0")
    values = f.values if isinstance(f, DistributionField) else np.asarray(f)
    grid = f.grid
    w = linf_q_weight(grid, q) if q > 0 else 1.0
    return float(np.max(np.abs(values) * w))


def divergence_free_project(u_raw) -> FluidField:
    """Leray projection onto discretely divergence-free fields; mean untouched."""
    if isinstance(u_raw, FluidField):
        grid, vals = u_raw.grid, u_raw.values
    else:
        raise TypeError("divergence_free_project expects a FluidField carrying its grid")
    d = grid.dim
    wn = spectral.wavenumbers(grid)
    u_hat = spectral.project_hat(spectral.fft(vals, d), wn)
    return FluidField(grid, spectral.ifft(u_hat, d))


def inner(u: FluidField, w: FluidField) -> float:
    return float(integrate_x(np.sum(u.values * w.values, axis=0), u.grid))
