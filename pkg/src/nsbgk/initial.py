"""Initial data generators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .fields import DistributionField, FluidField, divergence_free_project
from .grid import PhaseGrid
from .mollifier import regularize_initial_data

KINDS = ("reference", "zero", "maxwellian", "bimodal", "taylor_green", "random", "blowup")


@dataclass(frozen=True)
class InitialConfig:
    kind: str = "reference"
    density_amplitude: float = 0.2
    bulk_amplitude: float = 0.3
    temperature: float = 1.0
    flow: float = 0.5
    shift: float = 2.0
    regularize: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}", key="kind")
        if not self.temperature > 0:
            raise ConfigError("temperature must be positive", key="temperature")
        if abs(self.density_amplitude) >= 1:
            raise ConfigError("density_amplitude must lie in (-1, 1)", key="density_amplitude")


def gaussian(grid: PhaseGrid, rho, U, T):
    """rho (2 pi T)^(-d/2) exp(-|v - U|^2 / 2T) on the phase grid; rho, U per cell."""
    d = grid.dim
    v = grid.velocity.points.reshape((d,) + (1,) * d + grid.velocity.shape)
    rho = np.broadcast_to(rho, grid.spatial.shape).reshape(grid.spatial.shape + (1,) * d)
    U = np.asarray(U, dtype=float)
    if U.ndim == 1:
        U = U.reshape((d,) + (1,) * d)
    U = np.broadcast_to(U, (d,) + grid.spatial.shape).reshape((d,) + grid.spatial.shape + (1,) * d)
    c2 = np.sum((v - U) ** 2, axis=0)
    return rho * (2 * np.pi * T) ** (-d / 2) * np.exp(-c2 / (2 * T))


def taylor_green(grid, amplitude=1.0):
    """(sin x cos y, -cos x sin y) in the first two components, zero elsewhere."""
    x = grid.points
    u = np.zeros((grid.dim,) + grid.shape)
    if grid.dim == 1:
        return u
    u[0] = amplitude * np.sin(x[0]) * np.cos(x[1])
    u[1] = -amplitude * np.cos(x[0]) * np.sin(x[1])
    return u


def _random_density(grid, amplitude, rng, modes=3):
    x = grid.points
    pert = np.zeros(grid.shape)
    for _ in range(modes):
        k = rng.integers(-2, 3, size=grid.dim)
        phase = rng.uniform(0, 2 * np.pi)
        pert += np.cos(np.tensordot(k, x, axes=1) + phase)
    return 1.0 + amplitude * pert / modes


def _flow_field(grid, flow, rng=None):
    u = np.zeros((grid.dim,) + grid.shape)
    u[0] = flow
    if grid.dim > 1:
        u += taylor_green(grid, flow)
    return u


def build_initial(grid: PhaseGrid, cfg: InitialConfig, epsilon: float, seed: int = 0):
    """(f0, u0), regularized when ``cfg.regularize`` is set."""
    sg = grid.spatial
    d = grid.dim
    x0 = sg.points[0]
    e0 = np.zeros((d,) + sg.shape)
    kind = cfg.kind
    T = cfg.temperature
    if kind == "zero":
        f = np.zeros(grid.shape)
        u = np.zeros((d,) + sg.shape)
    elif kind in ("reference", "blowup"):
        rho = 1.0 + cfg.density_amplitude * np.sin(x0)
        U = e0.copy()
        U[0] = cfg.bulk_amplitude * np.cos(x0)
        f = gaussian(grid, rho, U, T)
        u = _flow_field(sg, cfg.flow)
    elif kind == "maxwellian":
        U = e0.copy()
        U[0] = cfg.bulk_amplitude
        f = gaussian(grid, 1.0, U, T)
        u = _flow_field(sg, cfg.flow)
    elif kind == "bimodal":
        U = e0.copy()
        U[0] = cfg.shift
        f = 0.5 * gaussian(grid, 1.0, U, T) + 0.5 * gaussian(grid, 1.0, -U, T)
        u = _flow_field(sg, cfg.flow)
    elif kind == "taylor_green":
        f = np.zeros(grid.shape)
        u = taylor_green(sg, cfg.flow)
    else:  # random
        rng = np.random.default_rng(seed)
        rho = _random_density(sg, cfg.density_amplitude, rng)
        U = cfg.bulk_amplitude * rng.uniform(-1, 1, size=d)
        f = gaussian(grid, rho, U, T)
        u = _flow_field(sg, cfg.flow)
    f0 = DistributionField(grid, f)
    u0 = divergence_free_project(FluidField(sg, u))
    if cfg.regularize:
        f0, u0 = regularize_initial_data(f0, u0, epsilon)
    return f0, u0
