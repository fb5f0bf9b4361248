"""Coupled incompressible Navier-Stokes / Vlasov-BGK simulator on the periodic box."""

from .coupling import PicardTrace, SimConfig, Trajectory, picard_advance, run
from .diagnostics import DiagnosticsRecord
from .fields import DistributionField, FluidField
from .grid import PhaseGrid, SpatialGrid, VelocityGrid
from .model import Model

__all__ = [
    "DiagnosticsRecord",
    "DistributionField",
    "FluidField",
    "Model",
    "PhaseGrid",
    "PicardTrace",
    "SimConfig",
    "SpatialGrid",
    "Trajectory",
    "VelocityGrid",
    "picard_advance",
    "run",
]
