"""Time marching: Picard iteration between the kinetic and fluid steps."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .diagnostics import DiagnosticsRecord, energy_balance, measure
from .errors import ConfigError, NumericalFailure, PicardNotConverged, StepSizeError
from .fields import DistributionField, FluidField, norm_linf_q, norm_lp
from .fluid import FluidStepConfig, drag_force, fluid_step
from .grid import PhaseGrid, integrate_xv
from .kinetic import kinetic_step, second_moment_inequality_check
from .macroscopic import local_maxwellian
from .model import Model

MODES = ("per_step_picard", "global_picard")
BOX_LAYER_TOL = 1e-10
CLIP_FLAG_TOL = 1e-8  # per-step clipped mass, relative to the total, above which a record is flagged


@dataclass(frozen=True)
class SimConfig:
    epsilon: float = 0.1
    mu: float = 0.1
    dt: float = 1e-3
    t_final: float = 1.0
    picard_tol: float = 1e-8
    picard_max: int = 20
    mode: str = "per_step_picard"
    drag_enabled: bool = True
    bgk_enabled: bool = True
    seed: int = 0
    q: float = 6.0
    interpolation: str = "linear"
    box_margin: float = 1e-8
    regularized_operators: bool = True
    max_retries: int = 3

    def __post_init__(self):
        for name in ("epsilon", "mu", "dt", "t_final", "picard_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive", key=name)
        if self.picard_max < 1:
            raise ConfigError("picard_max must be at least 1", key="picard_max")
        if self.t_final < self.dt * (1 - 1e-12):
            raise ConfigError("t_final must be at least dt", key="t_final")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}", key="mode")
        if self.interpolation not in ("linear", "cubic"):
            raise ConfigError("interpolation must be linear or cubic", key="interpolation")
        if self.q < 0:
            raise ConfigError("q must be >= 0", key="q")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_final / self.dt)))

    def model(self, grid: PhaseGrid, threads: int = 1) -> Model:
        return Model.build(
            grid,
            self.epsilon,
            self.mu,
            regularized=self.regularized_operators,
            drag_enabled=self.drag_enabled,
            bgk_enabled=self.bgk_enabled,
            interpolation=self.interpolation,
            box_margin=self.box_margin,
            threads=threads,
            q=self.q,
        )


@dataclass(frozen=True)
class PicardTrace:
    iter: int
    df_norm: float
    du_norm: float
    converged: bool


@dataclass
class StepResult:
    f: DistributionField
    u: FluidField
    traces: list
    clipped_mass: float = 0.0
    transport_mass_defect: float = 0.0
    newton_failures: int = 0


def _drag(f, u, model):
    if not model.drag_enabled:
        return None
    return drag_force(f, u, model.cutoff, dealias=model.dealias)


def _maxwellian(f, model):
    return local_maxwellian(f, full=True) if model.bgk_enabled else None


def picard_advance(f, u, model: Model, dt: float, tol: float, max_iter: int, *, step=None, m_old=None):
    """One time step by fixed-point iteration on the lagged coupling data.

    Iterate k+1 transports f with the fluid field averaged between u and u^k
    and relaxes towards M(f) and M(f^k); the fluid step uses the drag of
    (f, u) and (f^k, u^k). Starts from (f^0, u^0) = (f, u).
    """
    if model.bgk_enabled and m_old is None:
        m_old = _maxwellian(f, model)
    drag0 = _drag(f, u, model)
    cfg = FluidStepConfig(model.mu, dt, model.dealias)
    fk, uk, mk = f, u, m_old
    traces = []
    info = None
    for k in range(1, max_iter + 1):
        mw = (m_old, mk) if model.bgk_enabled else None
        f_new, info = kinetic_step(f, u, model, dt, u_end=uk, f_lag=fk, maxwellians=mw)
        u_new = fluid_step(u, drag0, cfg, model.kernel, drag_end=_drag(fk, uk, model), step=step)
        df = norm_linf_q(f_new.replace(f_new.values - fk.values), model.q)
        du = norm_lp(u_new.replace(u_new.values - uk.values), 2)
        done = df + du < tol
        traces.append(PicardTrace(k, df, du, bool(done)))
        fk, uk = f_new, u_new
        if done:
            return StepResult(fk, uk, traces, info.clipped_mass, info.transport_mass_defect, info.newton_failures)
        if model.bgk_enabled:
            mk = _maxwellian(fk, model)
    raise PicardNotConverged(
        f"Picard iteration did not converge in {max_iter} iterations "
        f"(last df+du = {traces[-1].df_norm + traces[-1].du_norm:.3e})",
        traces,
    )


def global_picard(f0, u0, model: Model, dt: float, n_steps: int, tol: float, max_iter: int):
    """Picard iteration over a whole trajectory; returns (states, traces).

    Iterate 0 is the initial state held constant in time. Each sweep
    recomputes every step from the previous sweep's trajectory. Norms are
    the maxima over time levels. On a single step this reproduces
    ``picard_advance``.
    """
    f_old = [f0] * (n_steps + 1)
    u_old = [u0] * (n_steps + 1)
    m_old = [_maxwellian(f0, model)] * (n_steps + 1)
    cfg = FluidStepConfig(model.mu, dt, model.dealias)
    traces = []
    for k in range(1, max_iter + 1):
        f_new, u_new = [f0], [u0]
        for n in range(n_steps):
            mw = (m_old[n], m_old[n + 1]) if model.bgk_enabled else None
            fn, _ = kinetic_step(
                f_new[n], u_old[n], model, dt, u_end=u_old[n + 1], f_lag=f_old[n + 1], maxwellians=mw
            )
            un = fluid_step(
                u_new[n],
                _drag(f_old[n], u_old[n], model),
                cfg,
                model.kernel,
                drag_end=_drag(f_old[n + 1], u_old[n + 1], model),
                step=n,
            )
            f_new.append(fn)
            u_new.append(un)
        df = max(norm_linf_q(a.replace(a.values - b.values), model.q) for a, b in zip(f_new, f_old))
        du = max(norm_lp(a.replace(a.values - b.values), 2) for a, b in zip(u_new, u_old))
        done = df + du < tol
        traces.append(PicardTrace(k, df, du, bool(done)))
        f_old, u_old = f_new, u_new
        if done:
            return list(zip(f_old, u_old)), traces
        m_old = [_maxwellian(f, model) for f in f_old]
    raise PicardNotConverged(f"global Picard iteration did not converge in {max_iter} sweeps", traces)


def check_velocity_box(f0: DistributionField, cfg: SimConfig):
    """The velocity box must contain the cut-off support and almost no initial mass at its edge."""
    vg = f0.grid.velocity
    if cfg.regularized_operators and vg.v_max < 1.0 / cfg.epsilon * (1 - 1e-12):
        raise ConfigError(f"v_max = {vg.v_max} is below 1/epsilon = {1 / cfg.epsilon}", key="v_max")
    total = float(integrate_xv(f0.values, f0.grid))
    if total <= 0:
        return
    edge = np.max(np.abs(vg.points), axis=0) > vg.v_max - vg.spacing
    d = f0.grid.dim
    layer = float(integrate_xv(f0.values * edge.reshape((1,) * d + vg.shape), f0.grid)) / total
    if layer > BOX_LAYER_TOL:
        raise ConfigError(f"initial data puts {layer:.2e} of its mass at the velocity box edge", key="v_max")


@dataclass
class Trajectory:
    records: list = field(default_factory=list)
    traces: list = field(default_factory=list)  # one list of PicardTrace per step
    f: DistributionField | None = None
    u: FluidField | None = None
    failure: NumericalFailure | None = None
    transport_mass_defects: list = field(default_factory=list)
    second_moment_checks: list = field(default_factory=list)  # (residual, tolerance) per step
    retries: int = 0

    @property
    def ok(self) -> bool:
        return self.failure is None


def _advance_with_retry(f, u, model, cfg: SimConfig, dt, step, m_old, depth=0):
    try:
        res = picard_advance(f, u, model, dt, cfg.picard_tol, cfg.picard_max, step=step, m_old=m_old)
        return res, 0
    except (PicardNotConverged, StepSizeError):
        if depth >= cfg.max_retries:
            raise
    first, r1 = _advance_with_retry(f, u, model, cfg, 0.5 * dt, step, m_old, depth + 1)
    second, r2 = _advance_with_retry(first.f, first.u, model, cfg, 0.5 * dt, step, None, depth + 1)
    second.traces = first.traces + second.traces
    second.clipped_mass += first.clipped_mass
    second.transport_mass_defect += first.transport_mass_defect
    second.newton_failures += first.newton_failures
    return second, 1 + r1 + r2


def _record(f_prev, u_prev, f, u, model, t, dt, remnant, clipped, m_new, smc):
    residual, inc = energy_balance(f_prev, u_prev, f, u, dt, model)
    remnant += inc
    smr = None
    if model.drag_enabled:
        smr, tol, _ = second_moment_inequality_check(f_prev, f, u_prev, dt, model, u_end=u)
        smc.append((smr, tol))
    rec = measure(
        f,
        u,
        model,
        t,
        maxwellian=m_new,
        clipped_mass=clipped,
        energy_balance_residual=residual,
        remnant_estimate=remnant,
        second_moment_residual=smr,
    )
    return rec, remnant


def run(cfg: SimConfig, f0: DistributionField, u0: FluidField, *, threads: int = 1, on_record=None, on_fields=None):
    """March (f0, u0) to t_final, emitting one DiagnosticsRecord per step.

    Numerical failures end the run with a flagged copy of the last record;
    the failure is kept on the returned Trajectory.
    """
    grid = f0.grid
    model = cfg.model(grid, threads)
    check_velocity_box(f0, cfg)
    traj = Trajectory()
    dt = cfg.t_final / cfg.n_steps

    def emit(rec):
        traj.records.append(rec)
        if on_record is not None:
            on_record(rec)

    m = _maxwellian(f0, model)
    emit(measure(f0, u0, model, 0.0, maxwellian=m))
    if on_fields is not None:
        on_fields(0, f0, u0)
    f, u = f0, u0
    remnant = 0.0
    try:
        if cfg.mode == "global_picard":
            states, traces = global_picard(f0, u0, model, dt, cfg.n_steps, cfg.picard_tol, cfg.picard_max)
            traj.traces.append(traces)
            for n, (fn, un) in enumerate(states[1:], start=1):
                m = _maxwellian(fn, model)
                rec, remnant = _record(f, u, fn, un, model, n * dt, dt, remnant, 0.0, m, traj.second_moment_checks)
                emit(rec)
                f, u = fn, un
                if on_fields is not None:
                    on_fields(n, f, u)
        else:
            for n in range(1, cfg.n_steps + 1):
                res, retries = _advance_with_retry(f, u, model, cfg, dt, n, m)
                traj.retries += retries
                traj.traces.append(res.traces)
                traj.transport_mass_defects.append(res.transport_mass_defect)
                m = _maxwellian(res.f, model)
                rec, remnant = _record(
                    f, u, res.f, res.u, model, n * dt, dt, remnant, res.clipped_mass, m, traj.second_moment_checks
                )
                flags = []
                if res.newton_failures:
                    flags.append(f"newton_fallback:{res.newton_failures}")
                if res.clipped_mass > CLIP_FLAG_TOL * rec.mass:
                    flags.append(f"clipping:{res.clipped_mass / rec.mass:.2e}")
                rec.flag = ";".join(flags) or None
                emit(rec)
                f, u = res.f, res.u
                if on_fields is not None:
                    on_fields(n, f, u)
    except NumericalFailure as exc:
        traj.failure = exc
        last = traj.records[-1]
        flagged = replace(last, flag=f"{type(exc).__name__}: {exc}")
        emit(flagged)
    traj.f, traj.u = f, u
    return traj
