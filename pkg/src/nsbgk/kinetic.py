"""Semi-Lagrangian step for the regularized Vlasov-BGK equation.

Each output node (x, v) is traced back along

    dX/ds = V,   dV/ds = a(X) - V,   a = eta_eps * u,

and the relaxation integral is evaluated with the trapezoidal rule in the
Jacobian-weighted (phase-volume conserving) Lagrangian frame.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import StepSizeError
from .fields import DistributionField, FluidField
from .grid import PhaseGrid, SpatialGrid, integrate_x, integrate_xv, tree_sum
from .macroscopic import exp_family_match, local_maxwellian
from .model import Model


@dataclass(frozen=True, eq=False)
class CharacteristicFoot:
    X: np.ndarray
    V: np.ndarray
    outside: np.ndarray


@dataclass(frozen=True)
class KineticStepInfo:
    clipped_mass: float = 0.0  # mass added by zeroing negative values
    transport_mass_defect: float = 0.0
    band_mass: float = 0.0
    newton_failures: int = 0


class PeriodicSampler:
    """Periodic cubic-spline evaluation of a vector field at arbitrary points."""

    def __init__(self, values: np.ndarray, grid: SpatialGrid):
        self.grid = grid
        self.values = values
        self.constant = None
        if np.ptp(values, axis=tuple(range(1, values.ndim))).max(initial=0.0) == 0.0:
            self.constant = values.reshape(values.shape[0], -1)[:, 0]
            return
        self.coeffs = [ndimage.spline_filter(c, order=3, mode="grid-wrap") for c in values]

    def __call__(self, X: np.ndarray) -> np.ndarray:
        d = self.grid.dim
        if self.constant is not None:
            return np.broadcast_to(self.constant.reshape((d,) + (1,) * (X.ndim - 1)), X.shape).copy()
        coords = (X / self.grid.spacing).reshape(d, -1)
        out = [
            ndimage.map_coordinates(c, coords, order=3, mode="grid-wrap", prefilter=False)
            for c in self.coeffs
        ]
        return np.stack(out).reshape(X.shape)


def _foot(x, v, a, tau):
    """Backward exponential-integrator foot over a time span tau with constant a."""
    e = np.expm1(tau)
    return x - a * tau - (v - a) * e, a + (v - a) * (1.0 + e)


def trace_back(x, v, u: FluidField, model: Model, dt: float, *, sampler=None, a_arrival=None) -> CharacteristicFoot:
    """Foot (X, V) at the start of the step for terminal data (x, v).

    ``a = eta_eps * u`` is held constant along the path, first at the arrival
    point and then refined once at the path midpoint.
    """
    grid = model.grid
    if sampler is None:
        sampler = PeriodicSampler(model.kernel.apply(u.values), grid.spatial)
    a0 = sampler(x) if a_arrival is None else a_arrival
    x_mid, _ = _foot(x, v, a0, 0.5 * dt)
    a1 = sampler(np.mod(x_mid, grid.spatial.domain_length))
    X, V = _foot(x, v, a1, dt)
    X = np.mod(X, grid.spatial.domain_length)
    outside = np.any(np.abs(V) > grid.velocity.v_max, axis=0)
    return CharacteristicFoot(X, V, outside)


def _forward_velocity(x, v, sampler, dt, L, a0):
    """Velocity after one step for particles departing from (x, v); a0 = a(x)."""
    e = -np.expm1(-0.5 * dt)
    x_mid = x + a0 * 0.5 * dt + (v - a0) * e
    a1 = sampler(np.mod(x_mid, L))
    return a1 + (v - a1) * np.exp(-dt)


def _phase_nodes(grid: PhaseGrid):
    d = grid.dim
    x = grid.spatial.points.reshape((d,) + grid.spatial.shape + (1,) * d)
    v = grid.velocity.points.reshape((d,) + (1,) * d + grid.velocity.shape)
    shape = (d,) + grid.shape
    return np.broadcast_to(x, shape), np.broadcast_to(v, shape)


class _Interpolator:
    """Gather-interpolation of phase-space arrays at characteristic feet.

    x axes are periodic, v axes are padded with zeros so feet outside the
    velocity box pick up nothing. Work is split over output nodes only, so
    results do not depend on the number of workers.
    """

    def __init__(self, grid: PhaseGrid, X, V, order: int, threads: int):
        d = grid.dim
        self.d, self.order, self.threads = d, order, max(1, int(threads))
        self.pad = 1 if order == 1 else 3
        nv = grid.velocity.cells_per_axis
        cx = (X / grid.spatial.spacing).reshape(d, -1)
        cv = (V + grid.velocity.v_max) / grid.velocity.spacing - 0.5 + self.pad
        lo = 0.0 if order == 1 else 1.0
        hi = nv + 2 * self.pad - (1.0 if order == 1 else 3.0)
        cv = np.clip(cv.reshape(d, -1), lo, hi)
        self.coords = np.concatenate([cx, cv])
        self.out_shape = grid.shape

    def __call__(self, values: np.ndarray) -> np.ndarray:
        d = self.d
        padded = np.pad(values, [(0, 0)] * d + [(self.pad, self.pad)] * d)
        if self.order != 1:
            padded = ndimage.spline_filter(padded, order=self.order, mode="grid-wrap")
        n = self.coords.shape[1]
        bounds = np.linspace(0, n, self.threads + 1).astype(int)

        def work(i):
            sl = slice(bounds[i], bounds[i + 1])
            return ndimage.map_coordinates(
                padded, self.coords[:, sl], order=self.order, mode="grid-wrap", prefilter=False
            )

        if self.threads == 1:
            out = work(0)
        else:
            with ThreadPoolExecutor(self.threads) as pool:
                out = np.concatenate(list(pool.map(work, range(self.threads))))
        return out.reshape(self.out_shape)


def _moment_targets(g, v_fwd, grid: PhaseGrid):
    w = grid.spatial.cell_volume * grid.velocity.weight
    n = g.size
    d = grid.dim
    gf = g.reshape(n)
    vf = v_fwd.reshape(d, n)
    mass = tree_sum(gf, 1) * w
    mom = tree_sum(vf * gf, 1) * w
    energy = tree_sum(np.sum(vf**2, axis=0) * gf, 1) * w
    return float(mass), mom, float(energy)


def _match_global_moments(g, targets, grid: PhaseGrid):
    """Rescale g by exp(a + b.v - c|v|^2) so its total (mass, momentum, energy) hit targets."""
    mass, mom, energy = targets
    if not mass > 0:
        return g, True
    d = grid.dim
    U = mom / mass
    T = (energy - mass * float(np.sum(U**2))) / (d * mass)
    if not T > 0:
        return g, False
    n = g.size
    vnodes = np.broadcast_to(
        grid.velocity.points.reshape((d,) + (1,) * d + grid.velocity.shape), (d,) + grid.shape
    ).reshape(d, n)
    c = (vnodes - U[:, None]) / np.sqrt(T)
    phi = np.concatenate([np.ones((1, n)), c, np.sum(c**2, axis=0, keepdims=True)])[None]
    target = np.zeros((1, d + 2))
    target[0, 0] = mass
    target[0, -1] = d * mass
    w = grid.spatial.cell_volume * grid.velocity.weight
    _, out, _, ok = exp_family_match(g.reshape(1, n), phi, target, w)
    if not ok[0]:
        got = float(integrate_xv(g, grid))
        return g * (mass / got if got > 0 else 1.0), False
    return out.reshape(g.shape), True


def _escaping_mass(f: DistributionField, v_fwd) -> float:
    """Mass whose one-step image lands in or beyond the outermost velocity cell."""
    vg = f.grid.velocity
    out = np.max(np.abs(v_fwd), axis=0) > vg.v_max - vg.spacing
    return float(integrate_xv(np.where(out, f.values, 0.0), f.grid))


def kinetic_step(
    f: DistributionField,
    u: FluidField,
    model: Model,
    dt: float,
    *,
    u_end: FluidField | None = None,
    f_lag: DistributionField | None = None,
    maxwellians=None,
):
    """Advance f by one step from lagged coupling data.

    ``u``/``u_end`` are the fluid states at the start and (lagged estimate of
    the) end of the step; transport uses their mean. ``f_lag`` supplies the
    Maxwellian at the arrival node (defaults to ``f``). ``maxwellians`` may
    pass precomputed ``(M(f), M(f_lag))`` corrected-Maxwellian results.
    Returns ``(f_new, KineticStepInfo)``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    grid = f.grid
    d = grid.dim
    L = grid.spatial.domain_length
    total = float(integrate_xv(f.values, grid))
    if f_lag is None:
        f_lag = f
    if u_end is None:
        u_end = u

    band = 0.0
    x, v = _phase_nodes(grid)
    if model.drag_enabled:
        u_mean = 0.5 * (u.values + u_end.values)
        sampler = PeriodicSampler(model.kernel.apply(u_mean), grid.spatial)
        # x are grid nodes, so a(x) needs no interpolation
        a_nodes = np.broadcast_to(sampler.values.reshape(sampler.values.shape + (1,) * d), x.shape)
        v_fwd = _forward_velocity(x, v, sampler, dt, L, a_nodes)
        if total > 0:
            band = _escaping_mass(f, v_fwd) / total
            if band > model.box_margin:
                raise StepSizeError(
                    f"velocity box too small for dt={dt}: {band:.2e} of the mass would leave it"
                )
        foot = trace_back(x, v, u, model, dt, sampler=sampler, a_arrival=a_nodes)
        X, V = foot.X, foot.V
        jac = np.exp(d * dt)
    else:
        X, V = np.mod(x - v * dt, L), v
        jac = 1.0
    order = 1 if model.interpolation == "linear" else 3
    interp = _Interpolator(grid, X, V, order, model.threads)

    def transport(values):
        return jac * interp(values)

    failures = 0
    Tf = transport(f.values)
    defect = 0.0
    if model.drag_enabled and total > 0:
        defect = float(integrate_xv(Tf, grid)) / total - 1.0
        Tf, ok = _match_global_moments(Tf, _moment_targets(f.values, v_fwd, grid), grid)
        failures += int(not ok)

    if model.bgk_enabled:
        if maxwellians is None:
            m_old = local_maxwellian(f, full=True)
            m_lag = m_old if f_lag is f else local_maxwellian(f_lag, full=True)
        else:
            m_old, m_lag = maxwellians
        failures += int(np.count_nonzero(m_old.failed))
        TM = transport(m_old.values)
        if model.drag_enabled and total > 0:
            TM, ok = _match_global_moments(TM, _moment_targets(m_old.values, v_fwd, grid), grid)
            failures += int(not ok)
        h2 = 0.5 * dt
        new = ((1.0 - h2) * Tf + h2 * (TM + m_lag.values)) / (1.0 + h2)
    else:
        new = Tf

    clipped = 0.0
    if np.any(new < 0):
        neg = np.minimum(new, 0.0)
        clipped = -float(integrate_xv(neg, grid))
        new = new - neg
    info = KineticStepInfo(clipped, defect, band, failures)
    return DistributionField(grid, new), info


def second_moment_inequality_check(f_before, f_after, u: FluidField, dt: float, model: Model, u_end=None):
    """Residual of  dM2/dt + 2 M2 <= 2 int |eta*u| m1 f dx  over one step.

    Returns ``(residual, tolerance, passed)``; the residual is non-positive up
    to O(dt) time-discretization slack.
    """
    grid = f_before.grid
    d = grid.dim
    if u_end is None:
        u_end = u
    speed = grid.velocity.speed.reshape((1,) * d + grid.velocity.shape)
    vsq = grid.velocity.speed_squared.reshape((1,) * d + grid.velocity.shape)
    m2_b = float(integrate_xv(vsq * f_before.values, grid))
    m2_a = float(integrate_xv(vsq * f_after.values, grid))
    f_mid = 0.5 * (f_before.values + f_after.values)
    m2_mid = 0.5 * (m2_b + m2_a)
    a = model.kernel.apply(0.5 * (u.values + u_end.values))
    a_abs = np.sqrt(np.sum(a**2, axis=0))
    from .grid import integrate_v

    m1 = integrate_v(speed * f_mid, grid)
    coupling = float(integrate_x(a_abs * m1, grid.spatial))
    residual = (m2_a - m2_b) / dt + 2.0 * m2_mid - 2.0 * coupling
    tol = 5.0 * dt * (2.0 * m2_mid + 2.0 * coupling)
    return residual, tol, residual <= tol
