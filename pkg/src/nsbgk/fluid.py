"""Pseudo-spectral step for the incompressible fluid with mollified convection and drag."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .errors import BlowUpError
from .fields import DistributionField, FluidField
from .mollifier import CutoffFunction, MollifierKernel, cutoff_weighted_moments


@dataclass(frozen=True)
class FluidStepConfig:
    mu: float
    dt: float
    dealias: bool = True

    def __post_init__(self):
        if not (self.mu > 0 and self.dt > 0):
            raise ValueError("mu and dt must be positive")


def _dealiased(values, grid, enabled):
    d = grid.dim
    hat = spectral.fft(values, d)
    if enabled:
        hat = hat * spectral.wavenumbers(grid).dealias
    return hat


def drag_force(f: DistributionField, u: FluidField, gamma: CutoffFunction, *, dealias: bool = False):
    """-(u m0 - m1) with the cut-off weighted moments of f; linear in u."""
    if f.grid.spatial != u.grid:
        raise ValueError("kinetic and fluid grids differ")
    m0, m1 = cutoff_weighted_moments(f, gamma)
    prod = u.values * m0
    if dealias:
        prod = spectral.ifft(_dealiased(prod, u.grid, True), u.grid.dim)
    return m1 - prod


def _rhs_hat(u_values, forcing, kernel, grid, dealias):
    """Projected explicit terms: -(a . grad) u + forcing, a = eta * u."""
    d = grid.dim
    wn = spectral.wavenumbers(grid)
    a = kernel.apply(u_values)
    grad = spectral.gradient(u_values, grid)
    conv = np.einsum("j...,ij...->i...", a, grad)
    total = _dealiased(-conv, grid, dealias)
    if forcing is not None:
        total = total + spectral.fft(forcing, d)
    return spectral.project_hat(total, wn)


def fluid_step(
    u: FluidField,
    drag,
    cfg: FluidStepConfig,
    kernel: MollifierKernel,
    *,
    drag_end=None,
    step: int | None = None,
) -> FluidField:
    """One Heun step for the explicit terms with Crank-Nicolson viscosity.

    ``drag`` is the drag at the start of the step, ``drag_end`` (defaults to
    ``drag``) an estimate at its end. Pass ``drag=None`` for a particle-free
    flow.
    """
    grid = u.grid
    d = grid.dim
    wn = spectral.wavenumbers(grid)
    h = cfg.dt
    z = 0.5 * cfg.mu * h * wn.k_sq
    lo, hi = 1.0 - z, 1.0 + z
    if drag_end is None:
        drag_end = drag
    u_hat = spectral.project_hat(spectral.fft(u.values, d), wn)
    n0 = _rhs_hat(u.values, drag, kernel, grid, cfg.dealias)
    pred_hat = (lo * u_hat + h * n0) / hi
    pred = spectral.ifft(pred_hat, d)
    n1 = _rhs_hat(pred, drag_end, kernel, grid, cfg.dealias)
    new_hat = (lo * u_hat + 0.5 * h * (n0 + n1)) / hi
    if not np.all(np.isfinite(new_hat)):
        raise BlowUpError(f"non-finite fluid spectrum at step {step}", step)
    return FluidField(grid, spectral.ifft(new_hat, d))


def pressure(u: FluidField, drag, kernel: MollifierKernel, *, dealias: bool = True) -> np.ndarray:
    """Zero-mean pressure whose gradient removes the compressive part of the forcing."""
    grid = u.grid
    d = grid.dim
    wn = spectral.wavenumbers(grid)
    a = kernel.apply(u.values)
    conv = np.einsum("j...,ij...->i...", a, spectral.gradient(u.values, grid))
    total = _dealiased(-conv, grid, dealias)
    if drag is not None:
        total = total + spectral.fft(drag, d)
    p_hat = -1j * np.sum(wn.k_deriv * total, axis=0) * wn.inv_kd_sq
    return spectral.ifft(p_hat, d)
