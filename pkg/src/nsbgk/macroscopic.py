"""Macroscopic fields of f and the conservative discrete local Maxwellian."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NewtonConvergenceError
from .fields import DistributionField
from .grid import PhaseGrid, VelocityGrid, integrate_v, tree_sum

RHO_FLOOR = 1e-12
T_FLOOR = 1e-10
NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
_POLISH_TOL = 1e-15
_CHUNK_ELEMS = 1 << 22


@dataclass(frozen=True, eq=False)
class MacroFields:
    """Per-cell density, bulk velocity (shape ``(dim, *xshape)``) and temperature."""

    rho: np.ndarray
    U: np.ndarray
    T: np.ndarray

    @property
    def dim(self) -> int:
        return self.U.shape[0]

    def raw_moments(self):
        """(m0, m1, m2) with m2 = int |v|^2 f = d rho T + rho |U|^2."""
        d = self.dim
        return self.rho, self.rho * self.U, d * self.rho * self.T + self.rho * np.sum(self.U**2, axis=0)


def _vel_broadcast(vgrid: VelocityGrid, nx_axes: int) -> np.ndarray:
    """Velocity nodes shaped ``(d, 1, ..., 1, *vshape)`` for x-major fields."""
    d = vgrid.dim
    return vgrid.points.reshape((d,) + (1,) * nx_axes + vgrid.shape)


def _cell_broadcast(a: np.ndarray, nv_axes: int) -> np.ndarray:
    return a.reshape(a.shape + (1,) * nv_axes)


def moments(f: DistributionField) -> MacroFields:
    grid = f.grid
    d = grid.dim
    vals = f.values
    rho = integrate_v(vals, grid)
    v = _vel_broadcast(grid.velocity, d)
    mom = integrate_v(v * vals, grid)
    live = rho > RHO_FLOOR
    U = np.where(live, mom / np.where(live, rho, 1.0), 0.0)
    c2 = np.sum((v - _cell_broadcast(U, d)) ** 2, axis=0)
    dpt = integrate_v(c2 * vals, grid)
    T = np.where(live, dpt / (d * np.where(live, rho, 1.0)), 0.0)
    return MacroFields(rho, U, T)


def maxwellian_analytic(m: MacroFields, vgrid: VelocityGrid) -> np.ndarray:
    """Closed-form local Maxwellian sampled on the velocity nodes (no correction)."""
    d = vgrid.dim
    nx = m.rho.ndim
    T = np.maximum(m.T, T_FLOOR)
    live = m.rho > RHO_FLOOR
    v = _vel_broadcast(vgrid, nx)
    c2 = np.sum((v - _cell_broadcast(m.U, d)) ** 2, axis=0)
    Tb = _cell_broadcast(T, d)
    pref = np.where(live, m.rho, 0.0) / (2 * np.pi * T) ** (d / 2)
    return _cell_broadcast(pref, d) * np.exp(-c2 / (2 * Tb))


def exp_family_match(base, phi, target, weight, tol=NEWTON_TOL, max_iter=NEWTON_MAX_ITER):
    """Find lam with sum_p phi[k,p] base[p] exp(lam . phi[:,p]) * weight == target[k].

    ``base`` is (B, P), ``phi`` is (B, K, P) or (1, K, P), ``target`` is (B, K).
    Residuals are measured relative to ``target[:, 0]`` (the mass). Newton with
    step halving whenever a full step would increase the residual.
    Returns ``(lam, g, err, converged)``.
    """
    B, P = base.shape
    K = phi.shape[1]
    scale = np.maximum(np.abs(target[:, 0]), 1e-300)
    lam = np.zeros((B, K))

    def evaluate(lam_):
        g_ = base * np.exp(np.einsum("bk,bkp->bp", lam_, phi))
        mom = tree_sum(phi * g_[:, None, :], 1) * weight
        err_ = np.max(np.abs(mom - target), axis=1) / scale
        return g_, mom, err_

    g, mom, err = evaluate(lam)
    active = err > _POLISH_TOL
    for _ in range(max_iter):
        if not np.any(active):
            break
        idx = np.flatnonzero(active)
        ph = phi if phi.shape[0] == 1 else phi[idx]
        gp = g[idx][:, None, :] * ph
        J = np.einsum("bkp,blp->bkl", gp, np.broadcast_to(ph, gp.shape)) * weight
        rhs = (target[idx] - mom[idx])[..., None]
        try:
            step = np.linalg.solve(J, rhs)[..., 0]
        except np.linalg.LinAlgError:
            step = np.stack([np.linalg.lstsq(Ji, ri[:, 0], rcond=None)[0] for Ji, ri in zip(J, rhs)])
        s = np.ones(len(idx))
        pending = np.ones(len(idx), dtype=bool)
        lam_idx = lam[idx].copy()
        new_lam = lam_idx.copy()
        new_err = err[idx].copy()
        for _halving in range(12):
            sub = np.flatnonzero(pending)
            if sub.size == 0:
                break
            trial = lam_idx[sub] + s[sub, None] * step[sub]
            ph_sub = phi if phi.shape[0] == 1 else phi[idx[sub]]
            gt = base[idx[sub]] * np.exp(np.einsum("bk,bkp->bp", trial, ph_sub))
            mt = tree_sum(ph_sub * gt[:, None, :], 1) * weight
            et = np.max(np.abs(mt - target[idx[sub]]), axis=1) / scale[idx[sub]]
            ok = np.isfinite(et) & (et < err[idx[sub]])
            new_lam[sub[ok]] = trial[ok]
            new_err[sub[ok]] = et[ok]
            pending[sub[ok]] = False
            s[sub[~ok]] *= 0.5
        stalled = pending
        lam[idx] = new_lam
        g, mom, err = evaluate(lam)
        done = err[idx] <= _POLISH_TOL
        active[idx[done | stalled]] = False
    converged = err <= tol
    return lam, g, err, converged


def _basis(vflat: np.ndarray, U: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Centered, scaled moment basis (1, (v-U)/sqrt T, |v-U|^2/T); shape (B, d+2, P)."""
    c = (vflat[None, :, :] - U[:, :, None]) / np.sqrt(T)[:, None, None]
    return np.concatenate([np.ones_like(c[:, :1]), c, np.sum(c**2, axis=1, keepdims=True)], axis=1)


@dataclass(frozen=True, eq=False)
class CorrectedMaxwellian:
    values: np.ndarray
    log_values: np.ndarray
    failed: np.ndarray


def _correct_cells(m: MacroFields, vgrid: VelocityGrid, tol=NEWTON_TOL) -> CorrectedMaxwellian:
    d = vgrid.dim
    xshape = m.rho.shape
    B = int(np.prod(xshape)) if xshape else 1
    P = int(np.prod(vgrid.shape))
    rho = m.rho.reshape(B)
    U = m.U.reshape(d, B).T
    T = np.maximum(m.T.reshape(B), T_FLOOR)
    vflat = vgrid.points.reshape(d, P)
    values = np.zeros((B, P))
    logs = np.full((B, P), -np.inf)
    failed = np.zeros(B, dtype=bool)
    live = np.flatnonzero(rho > RHO_FLOOR)
    chunk = max(1, _CHUNK_ELEMS // (P * (d + 2)))
    for start in range(0, live.size, chunk):
        idx = live[start : start + chunk]
        phi = _basis(vflat, U[idx], T[idx])
        c2 = phi[:, -1, :]
        log_raw = (np.log(rho[idx]) - 0.5 * d * np.log(2 * np.pi * T[idx]))[:, None] - 0.5 * c2
        base = np.exp(log_raw)
        target = np.zeros((idx.size, d + 2))
        target[:, 0] = rho[idx]
        target[:, -1] = d * rho[idx]
        lam, g, err, ok = exp_family_match(base, phi, target, vgrid.weight, tol=tol)
        corrected_log = log_raw + np.einsum("bk,bkp->bp", lam, phi)
        values[idx] = np.where(ok[:, None], g, base)
        logs[idx] = np.where(ok[:, None], corrected_log, log_raw)
        failed[idx] = ~ok
    shape = xshape + vgrid.shape
    return CorrectedMaxwellian(values.reshape(shape), logs.reshape(shape), failed.reshape(xshape))


def maxwellian(m: MacroFields, grid: VelocityGrid, *, correct: bool = True, full: bool = False):
    """Discrete local Maxwellian whose quadrature moments equal ``m``.

    Cells where the Newton correction fails fall back to the sampled closed
    form and are marked in ``failed`` (returned when ``full=True``).
    """
    if not correct:
        vals = maxwellian_analytic(m, grid)
        if full:
            with np.errstate(divide="ignore"):
                return CorrectedMaxwellian(vals, np.log(vals), np.zeros(m.rho.shape, dtype=bool))
        return vals
    res = _correct_cells(m, grid)
    return res if full else res.values


def local_maxwellian(f: DistributionField, *, full: bool = False):
    return maxwellian(moments(f), f.grid.velocity, full=full)


def conservation_correct(M_raw, target, vgrid: VelocityGrid):
    """Adjust exp-family samples so their discrete moments hit ``target``.

    ``M_raw`` holds samples for one cell (shape ``vgrid.shape``) or a batch of
    cells (leading axes). ``target`` is ``(rho, rho*U, d*rho*T + rho*|U|^2)``.
    The result is ``M_raw * exp(a + b.v - c|v|^2)`` for some (a, b, c).
    """
    d = vgrid.dim
    M_raw = np.asarray(M_raw, dtype=float)
    rho, mom, en = (np.asarray(t, dtype=float) for t in target)
    xshape = rho.shape
    B = int(np.prod(xshape)) if xshape else 1
    P = int(np.prod(vgrid.shape))
    rho = rho.reshape(B)
    if np.any(rho <= RHO_FLOOR):
        raise ValueError("target density must exceed the density floor")
    U = np.asarray(mom).reshape(d, B).T / rho[:, None]
    T = (en.reshape(B) - rho * np.sum(U**2, axis=1)) / (d * rho)
    if np.any(T <= T_FLOOR):
        raise ValueError("target temperature must exceed the temperature floor")
    phi = _basis(vgrid.points.reshape(d, P), U, T)
    tgt = np.zeros((B, d + 2))
    tgt[:, 0] = rho
    tgt[:, -1] = d * rho
    lam, g, err, ok = exp_family_match(M_raw.reshape(B, P), phi, tgt, vgrid.weight)
    if not np.all(ok):
        raise NewtonConvergenceError(
            f"moment matching did not converge in {NEWTON_MAX_ITER} iterations "
            f"(worst residual {np.max(err):.3e})"
        )
    return g.reshape(M_raw.shape)


def velocity_moments(values: np.ndarray, grid: PhaseGrid):
    """Raw per-cell moments (m0, m1, m2) of an arbitrary sample array."""
    d = grid.dim
    v = _vel_broadcast(grid.velocity, d)
    m0 = integrate_v(values, grid)
    m1 = integrate_v(v * values, grid)
    m2 = integrate_v(grid.velocity.speed_squared.reshape((1,) * d + grid.velocity.shape) * values, grid)
    return m0, m1, m2
