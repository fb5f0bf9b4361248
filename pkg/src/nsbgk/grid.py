"""Discrete phase space: periodic spatial grid times a truncated velocity box."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np


def tree_sum(a: np.ndarray, naxes: int) -> np.ndarray:
    """Sum over the trailing ``naxes`` axes with a fixed pairwise order.

    The trailing axes are flattened into one contiguous axis so numpy's
    pairwise reduction runs over the same element order every time,
    independently of how the array was produced.
    """
    a = np.asarray(a, dtype=float)
    if naxes == 0:
        return a
    lead = a.shape[: a.ndim - naxes]
    flat = np.ascontiguousarray(a).reshape(lead + (-1,))
    return np.add.reduce(flat, axis=-1)


@dataclass(frozen=True)
class SpatialGrid:
    dim: int
    cells_per_axis: int
    domain_length: float = 2 * math.pi

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        n = self.cells_per_axis
        if n < 2 or n & (n - 1):
            raise ValueError(f"cells_per_axis must be a power of two, got {n}")
        if not self.domain_length > 0:
            raise ValueError("domain_length must be positive")

    @property
    def spacing(self) -> float:
        return self.domain_length / self.cells_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells_per_axis,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def volume(self) -> float:
        return self.domain_length**self.dim

    @cached_property
    def axis(self) -> np.ndarray:
        return np.arange(self.cells_per_axis) * self.spacing

    @cached_property
    def points(self) -> np.ndarray:
        """Coordinates, shape ``(dim, *shape)``."""
        return np.stack(np.meshgrid(*([self.axis] * self.dim), indexing="ij"))


@dataclass(frozen=True)
class VelocityGrid:
    dim: int
    cells_per_axis: int
    v_max: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.cells_per_axis < 2:
            raise ValueError("cells_per_axis must be at least 2")
        if not self.v_max > 0:
            raise ValueError("v_max must be positive")

    @property
    def spacing(self) -> float:
        return 2 * self.v_max / self.cells_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells_per_axis,) * self.dim

    @property
    def weight(self) -> float:
        return self.spacing**self.dim

    @cached_property
    def axis(self) -> np.ndarray:
        j = np.arange(self.cells_per_axis)
        return -self.v_max + (j + 0.5) * self.spacing

    @cached_property
    def points(self) -> np.ndarray:
        """Velocity nodes, shape ``(dim, *shape)``."""
        return np.stack(np.meshgrid(*([self.axis] * self.dim), indexing="ij"))

    @cached_property
    def speed_squared(self) -> np.ndarray:
        return np.sum(self.points**2, axis=0)

    @cached_property
    def speed(self) -> np.ndarray:
        return np.sqrt(self.speed_squared)


@dataclass(frozen=True)
class PhaseGrid:
    spatial: SpatialGrid
    velocity: VelocityGrid

    def __post_init__(self):
        if self.spatial.dim != self.velocity.dim:
            raise ValueError("spatial and velocity dimensions differ")

    @classmethod
    def build(cls, dim: int, nx: int, nv: int, v_max: float, length: float = 2 * math.pi):
        return cls(SpatialGrid(dim, nx, length), VelocityGrid(dim, nv, v_max))

    @property
    def dim(self) -> int:
        return self.spatial.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.spatial.shape + self.velocity.shape


def integrate_v(g, grid: PhaseGrid) -> np.ndarray:
    """Midpoint-rule integral over velocity; returns one value per spatial cell.

    Extra leading axes (e.g. vector components) are carried through.
    """
    g = np.asarray(g, dtype=float)
    d = grid.dim
    if g.shape[g.ndim - 2 * d :] != grid.shape:
        raise ValueError(f"shape {g.shape} does not end with phase shape {grid.shape}")
    return tree_sum(g, d) * grid.velocity.weight


def integrate_x(g, grid: SpatialGrid) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    d = grid.dim
    if g.shape[g.ndim - d :] != grid.shape:
        raise ValueError(f"shape {g.shape} does not end with spatial shape {grid.shape}")
    return tree_sum(g, d) * grid.cell_volume


def integrate_xv(g, grid: PhaseGrid) -> np.ndarray:
    return integrate_x(integrate_v(g, grid), grid.spatial)
