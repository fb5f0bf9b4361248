"""Monitored quantities of the coupled run and the inequalities they satisfy."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import spectral
from .fields import DistributionField, FluidField, norm_linf_q
from .grid import integrate_v, integrate_x, integrate_xv
from .macroscopic import local_maxwellian
from .model import Model

ZERO_F = 1e-300


@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    kinetic_momentum: list
    fluid_momentum: list
    m2: float
    m3: float
    fluid_energy: float
    enstrophy_flux: float
    relative_drag_energy: float
    entropy: float
    entropy_abs: float
    dissipation: float
    linf: float
    linf_q: float
    clipped_mass: float = 0.0
    energy_balance_residual: float = 0.0
    remnant_estimate: float = 0.0
    mixed_estimate: float = 0.0
    second_moment_residual: float | None = None
    flag: str | None = None

    @property
    def total_energy(self) -> float:
        return 0.5 * self.m2 + self.fluid_energy

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EntropyReport:
    H: float
    H_abs: float
    D: float
    cross: float  # int (M - f) ln M, zero when M shares the moments of f
    cross_scale: float
    skipped: int


def entropy_report(f: DistributionField, maxwellian=None) -> EntropyReport:
    if np.any(f.values < 0):
        raise ValueError("entropy needs f >= 0")
    grid = f.grid
    if maxwellian is None:
        maxwellian = local_maxwellian(f, full=True)
    vals = f.values
    live = vals > ZERO_F
    safe = np.where(live, vals, 1.0)
    lnf = np.where(live, np.log(safe), 0.0)
    H = float(integrate_xv(vals * lnf, grid))
    H_abs = float(integrate_xv(vals * np.abs(lnf), grid))
    M = maxwellian.values
    lnM = maxwellian.log_values
    has_m = np.isfinite(lnM)
    lnM0 = np.where(has_m, lnM, 0.0)
    both = live & has_m
    # f = 0 with M > 0 (or the reverse) gives an infinite integrand; count and skip
    skipped = int(np.count_nonzero(live != has_m))
    D = float(integrate_xv(np.where(both, (M - vals) * (lnM0 - lnf), 0.0), grid))
    cross = float(integrate_xv((M - vals) * lnM0, grid))
    scale = float(integrate_xv((M + vals) * np.abs(lnM0), grid))
    return EntropyReport(H, H_abs, D, cross, scale, skipped)


def entropy_and_dissipation(f: DistributionField):
    """(H, H_abs, D) with the 0 ln 0 = 0 convention."""
    r = entropy_report(f)
    return r.H, r.H_abs, r.D


def _vel(grid, d):
    return grid.velocity.points.reshape((d,) + (1,) * d + grid.velocity.shape)


def relative_drag_energy(f: DistributionField, u: FluidField) -> float:
    grid = f.grid
    d = grid.dim
    v = _vel(grid, d)
    uu = u.values.reshape(u.values.shape + (1,) * d)
    return float(integrate_xv(np.sum((uu - v) ** 2, axis=0) * f.values, grid))


def enstrophy_flux(u: FluidField, mu: float) -> float:
    g = spectral.gradient(u.values, u.grid)
    return mu * float(integrate_x(np.sum(g**2, axis=(0, 1)), u.grid))


def remnant_rate(f: DistributionField, u: FluidField, model: Model) -> float:
    """Rate by which the regularization breaks the energy identity.

    int int f [(1 - gamma)|u|^2 - (1 - gamma) u.v + (eta*u - u).v]
    """
    grid = f.grid
    d = grid.dim
    v = _vel(grid, d)
    outside = (1.0 - model.cutoff.samples).reshape((1,) * d + grid.velocity.shape)
    fo = outside * f.values
    m0o = integrate_v(fo, grid)
    m1o = integrate_v(v * fo, grid)
    m1 = integrate_v(v * f.values, grid)
    a = model.kernel.apply(u.values)
    dens = np.sum(u.values**2, axis=0) * m0o - np.sum(u.values * m1o, axis=0) + np.sum((a - u.values) * m1, axis=0)
    return float(integrate_x(dens, grid.spatial))


def mixed_estimate(f: DistributionField, u: FluidField, model: Model) -> float:
    """int int |eta*u - v| (1 + |v|) f."""
    grid = f.grid
    d = grid.dim
    v = _vel(grid, d)
    a = model.kernel.apply(u.values).reshape(u.values.shape + (1,) * d)
    w = np.sqrt(np.sum((a - v) ** 2, axis=0)) * (1.0 + grid.velocity.speed)
    return float(integrate_xv(w * f.values, grid))


def total_energy(f: DistributionField, u: FluidField) -> float:
    vsq = f.grid.velocity.speed_squared
    return 0.5 * float(integrate_xv(vsq * f.values, f.grid)) + 0.5 * float(
        integrate_x(np.sum(u.values**2, axis=0), u.grid)
    )


def energy_balance(f_prev, u_prev, f_next, u_next, dt: float, model: Model):
    """Per-step residual of the energy identity with the regularization remnant.

    Returns ``(residual, remnant_increment)`` where the increment is
    ``dt * remnant_rate`` at the midpoint state.
    """
    f_mid = f_prev.replace(0.5 * (f_prev.values + f_next.values))
    u_mid = u_prev.replace(0.5 * (u_prev.values + u_next.values))
    diss = enstrophy_flux(u_mid, model.mu) + relative_drag_energy(f_mid, u_mid)
    remnant = dt * remnant_rate(f_mid, u_mid, model)
    residual = total_energy(f_next, u_next) - total_energy(f_prev, u_prev) + dt * diss - remnant
    return residual, remnant


def momentum_exchange_check(record_prev: DiagnosticsRecord, record_next: DiagnosticsRecord) -> float:
    a = np.add(record_prev.kinetic_momentum, record_prev.fluid_momentum)
    b = np.add(record_next.kinetic_momentum, record_next.fluid_momentum)
    return float(np.linalg.norm(b - a))


def measure(f: DistributionField, u: FluidField, model: Model, t: float, *, maxwellian=None, **step_fields):
    """Record of the state-dependent quantities; step quantities come in ``step_fields``."""
    grid = f.grid
    d = grid.dim
    v = _vel(grid, d)
    speed = grid.velocity.speed
    ent = entropy_report(f, maxwellian)
    return DiagnosticsRecord(
        t=float(t),
        mass=float(integrate_xv(f.values, grid)),
        kinetic_momentum=[float(x) for x in integrate_xv(v * f.values, grid)],
        fluid_momentum=[float(x) for x in integrate_x(u.values, u.grid)],
        m2=float(integrate_xv(speed**2 * f.values, grid)),
        m3=float(integrate_xv(speed**3 * f.values, grid)),
        fluid_energy=0.5 * float(integrate_x(np.sum(u.values**2, axis=0), u.grid)),
        enstrophy_flux=enstrophy_flux(u, model.mu),
        relative_drag_energy=relative_drag_energy(f, u),
        entropy=ent.H,
        entropy_abs=ent.H_abs,
        dissipation=ent.D,
        linf=float(np.max(np.abs(f.values))),
        linf_q=norm_linf_q(f, model.q),
        mixed_estimate=mixed_estimate(f, u, model),
        **step_fields,
    )


@dataclass
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    passed: bool
    note: str = ""


@dataclass
class BoundsReport:
    checks: list = field(default_factory=list)
    growth_rate: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _trapezoid(values, times):
    values = np.asarray(values, dtype=float)
    times = np.asarray(times, dtype=float)
    if values.size < 2:
        return np.zeros(values.size)
    inc = 0.5 * (values[1:] + values[:-1]) * np.diff(times)
    return np.concatenate([[0.0], np.cumsum(inc)])


def entropy_abs_bound(first: DiagnosticsRecord, t: float, remnant: float, grid, drag_enabled: bool) -> float:
    """Initial-data bound for H_abs(t) + int_0^t D.

    Splits f ln(1/f) on {f >= exp(-|v|^2)} (bounded by |v|^2 f) and on the
    complement (bounded by (2/e) exp(-|v|^2/2)); the velocity divergence of
    the drag adds d * mass per unit time to the entropy.
    """
    d = grid.dim
    gauss = float(np.sum(np.exp(-0.5 * grid.velocity.speed_squared)) * grid.velocity.weight)
    tail = 2.0 * grid.spatial.volume * (2.0 / math.e) * gauss
    growth = d * first.mass * t if drag_enabled else 0.0
    return first.entropy + growth + 4.0 * (first.total_energy + abs(remnant)) + tail


def theorem_bounds_check(records, grid, dt: float, drag_enabled: bool = True) -> BoundsReport:
    """Structure checks on a trajectory: sup-norm growth, energy budget, entropy bound."""
    rep = BoundsReport()
    if not records:
        return rep
    first = records[0]
    times = np.array([r.t for r in records])
    # (i) ||f||_inf <= exp(c t) ||f0||_inf with a finite measured c
    c = 0.0
    if first.linf > 0:
        for r in records[1:]:
            if r.t > 0 and r.linf > 0:
                c = max(c, math.log(r.linf / first.linf) / r.t)
    rep.growth_rate = c
    rep.checks.append(BoundCheck("sup_norm_growth", c, math.inf, math.isfinite(c), "measured exponential rate"))
    # (ii) corrected energy budget non-increasing up to the time-stepping tolerance
    diss = _trapezoid([r.enstrophy_flux + r.relative_drag_energy for r in records], times)
    E0 = first.total_energy
    worst_lhs, worst_rhs, ok = 0.0, 0.0, True
    for n, r in enumerate(records):
        lhs = r.total_energy + diss[n] - r.remnant_estimate
        rhs = E0 + n * 5.0 * dt**2 * E0
        if lhs - rhs > worst_lhs - worst_rhs or n == 0:
            worst_lhs, worst_rhs = lhs, rhs
        ok &= lhs <= rhs
    rep.checks.append(BoundCheck("energy_budget", worst_lhs, worst_rhs, ok))
    # (iii) entropy: D >= 0 everywhere and H_abs + int D bounded by initial data
    dmin = min(r.dissipation for r in records)
    rep.checks.append(BoundCheck("dissipation_sign", dmin, 0.0, dmin >= 0, "min D over the run"))
    dint = _trapezoid([r.dissipation for r in records], times)
    worst_lhs, worst_rhs, ok = -math.inf, 0.0, True
    for n, r in enumerate(records):
        lhs = r.entropy_abs + dint[n]
        rhs = entropy_abs_bound(first, r.t - first.t, r.remnant_estimate, grid, drag_enabled)
        if lhs - rhs > worst_lhs - worst_rhs:
            worst_lhs, worst_rhs = lhs, rhs
        ok &= lhs <= rhs
    rep.checks.append(BoundCheck("entropy_bound", worst_lhs, worst_rhs, ok))
    return rep
