from __future__ import annotations

from dataclasses import dataclass

from .grid import PhaseGrid
from .mollifier import CutoffFunction, MollifierKernel


@dataclass(frozen=True, eq=False)
class Model:
    """Operators and switches shared by the kinetic and fluid steppers."""

    grid: PhaseGrid
    kernel: MollifierKernel
    cutoff: CutoffFunction
    mu: float = 0.1
    drag_enabled: bool = True
    bgk_enabled: bool = True
    interpolation: str = "linear"
    box_margin: float = 1e-8
    threads: int = 1
    dealias: bool = True
    q: float = 6.0

    @classmethod
    def build(cls, grid: PhaseGrid, epsilon: float, mu: float = 0.1, *, regularized: bool = True, **kw):
        """``regularized=False`` uses the identity mollifier and a cut-off equal to one."""
        if regularized:
            kernel = MollifierKernel.bump(grid.spatial, epsilon)
            cutoff = CutoffFunction.smooth(grid.velocity, epsilon)
        else:
            kernel = MollifierKernel.identity(grid.spatial)
            cutoff = CutoffFunction.one(grid.velocity)
        return cls(grid, kernel, cutoff, mu, **kw)

    @property
    def epsilon(self) -> float:
        return self.kernel.epsilon
