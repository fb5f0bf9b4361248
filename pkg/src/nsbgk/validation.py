"""Desk-scale validation suites; each returns a list of Check rows."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import oracles
from .config import GridConfig, RunManifest
from .coupling import SimConfig, picard_advance, run
from .diagnostics import entropy_report, momentum_exchange_check, theorem_bounds_check
from .fields import DistributionField, FluidField
from .fluid import FluidStepConfig, fluid_step
from .grid import PhaseGrid, integrate_v
from .initial import InitialConfig, build_initial, taylor_green
from .io import record_line
from .kinetic import trace_back
from .lemmas import (
    MAXWELLIAN_DOMINATION_CONSTANT,
    check_lemma_rho_T,
    check_moment_interpolation,
    maxwellian_domination_ratio,
)
from .macroscopic import local_maxwellian, velocity_moments
from .mollifier import MollifierKernel

SUITES = ("lemmas", "conservation", "convergence", "epsilon_study", "fluid_analytic", "bgk_analytic")


@dataclass
class Check:
    name: str
    measured: float
    threshold: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<40s} measured={self.measured:.3e}  threshold={self.threshold:.3e}  {self.detail}"


def reference_manifest(**numerics) -> RunManifest:
    """d = 1, 64 x 64 cells, v_max = 10, eps = mu = 0.1, dt = 1e-3, t_final = 1."""
    return RunManifest(SimConfig(**numerics), GridConfig(), InitialConfig())


def run_manifest(man: RunManifest, threads: int = 1, on_record=None):
    grid = man.grid.build()
    f0, u0 = build_initial(grid, man.initial, man.config.epsilon, man.config.seed)
    return run(man.config, f0, u0, threads=threads, on_record=on_record), grid


# -- random corpora --------------------------------------------------------


def random_field(grid: PhaseGrid, rng, max_bumps=3, min_width=0.5):
    """Nonnegative, compactly supported sum of truncated bumps in each cell."""
    d = grid.dim
    v = grid.velocity.points.reshape((d,) + grid.velocity.shape)
    vmax = grid.velocity.v_max
    out = np.zeros(grid.shape)
    for idx in np.ndindex(grid.spatial.shape):
        cell = np.zeros(grid.velocity.shape)
        for _ in range(rng.integers(1, max_bumps + 1)):
            width = rng.uniform(min_width, 2.0)
            center = rng.uniform(-0.4 * vmax, 0.4 * vmax, size=(d,) + (1,) * d)
            r2 = np.sum((v - center) ** 2, axis=0) / width**2
            cell += rng.uniform(0.1, 1.0) * np.where(r2 < 9.0, np.exp(-0.5 * r2), 0.0)
        out[idx] = cell
    return DistributionField(grid, out)


def lemma_corpus(n=1000, dim=1, seed=0):
    grid = PhaseGrid.build(dim, 4 if dim == 1 else 2, 64 if dim == 1 else 32, 8.0)
    rng = np.random.default_rng(seed)
    for _ in range(n):
        yield random_field(grid, rng)


def suite_lemmas(n=1000, seed=0):
    checks = []
    for dim, count in ((1, n), (2, max(1, n // 5))):
        worst = {"rho_T_q0": 0.0, "rho_T_q6": 0.0, "interp_1_2": 0.0, "interp_2_3": 0.0, "interp_0_1.5": 0.0}
        ok = {k: True for k in worst}
        ratios = []
        for f in lemma_corpus(count, dim, seed):
            for q, key in ((0.0, "rho_T_q0"), (6.0, "rho_T_q6")):
                lhs, rhs, p = check_lemma_rho_T(f, q)
                worst[key] = max(worst[key], lhs / rhs if rhs > 0 else 0.0)
                ok[key] &= p
            for (a, b), key in (((1, 2), "interp_1_2"), ((2, 3), "interp_2_3"), ((0, 1.5), "interp_0_1.5")):
                lhs, rhs, p = check_moment_interpolation(f, a, b)
                worst[key] = max(worst[key], lhs / rhs if rhs > 0 else 0.0)
                ok[key] &= p
            ratios.append(maxwellian_domination_ratio(f, 6.0))
        for key in worst:
            checks.append(Check(f"lemma {key} d={dim} ({count} fields)", worst[key], 1.0, ok[key], "worst lhs/rhs"))
        rmax = float(np.max(ratios))
        const = MAXWELLIAN_DOMINATION_CONSTANT.get((dim, 6.0))
        passed = math.isfinite(rmax) and (const is None or rmax <= const)
        checks.append(
            Check(f"maxwellian domination q=6 d={dim}", rmax, const if const else math.inf, passed, "max ratio")
        )
    closed = oracles.lemma_constant(3)
    rel = abs(closed["closed_form"] - closed["radius_scan"]) / closed["closed_form"]
    checks.append(Check("rho-T constant vs radius scan (d=3)", rel, 1e-6, rel <= 1e-6))
    return checks


# -- conservation / reference run -----------------------------------------


def cancellation_residual(f: DistributionField) -> float:
    """Worst per-cell relative moment (0, 1, 2) of M(f) - f."""
    grid = f.grid
    m0, m1, m2 = velocity_moments(local_maxwellian(f) - f.values, grid)
    rho, _, e = velocity_moments(f.values, grid)
    live = rho > 1e-12
    worst = max(
        np.max(np.abs(m0[live]) / rho[live]),
        np.max(np.abs(m1[:, live]) / rho[live]),
        np.max(np.abs(m2[live]) / e[live]),
    )
    return float(worst)


def suite_conservation(threads=1, t_final=1.0):
    man = reference_manifest(t_final=t_final)
    traj, grid = run_manifest(man, threads)
    recs = traj.records
    checks = []
    if traj.failure is not None:
        checks.append(Check("reference run completes", 1.0, 0.0, False, str(traj.failure)))
        return checks
    dt = man.config.dt
    m0 = recs[0].mass
    clipped = sum(r.clipped_mass for r in recs)
    # clipping negative values adds mass, so subtract what was added so far
    added = np.cumsum([0.0] + [r.clipped_mass for r in recs[1:]])
    drift = max(abs(r.mass - c - m0) for r, c in zip(recs, added)) / m0
    checks.append(Check(f"mass drift over {len(recs) - 1} steps", drift, 1e-9, drift <= 1e-9, f"clipped={clipped:.1e}"))
    canc = cancellation_residual(traj.f)
    checks.append(Check("per-cell cancellation of M(f)-f", canc, 1e-11, canc <= 1e-11))
    dmin = min(r.dissipation for r in recs)
    checks.append(Check("dissipation D >= 0 every step", dmin, 0.0, dmin >= 0))
    ent = entropy_report(traj.f)
    cross = abs(ent.cross) / max(ent.cross_scale, 1e-300)
    checks.append(Check("int (M-f) ln M = 0 (final state)", cross, 1e-10, cross <= 1e-10))
    rep = theorem_bounds_check(recs, grid, dt, man.config.drag_enabled)
    for c in rep.checks:
        margin = c.lhs / c.rhs if c.rhs not in (0.0, math.inf) else c.lhs
        checks.append(Check(f"bound {c.name}", margin, 1.0 if c.rhs not in (0.0, math.inf) else c.rhs, c.passed, c.note))
    E0 = recs[0].total_energy
    worst = max(abs(r.energy_balance_residual) for r in recs[1:])
    bound = 5 * dt**2 * E0
    checks.append(Check("per-step corrected energy residual", worst, bound, worst <= bound))
    finite = all(math.isfinite(x) for r in recs for x in (r.m2, r.m3, r.mixed_estimate))
    checks.append(Check("M2, M3, mixed estimate finite every step", float(not finite), 0.0, finite))
    sm = traj.second_moment_checks
    excess = max(res - tol for res, tol in sm) if sm else 0.0
    checks.append(Check("second-moment inequality every step", excess, 0.0, excess <= 0, "max residual - tol"))
    mom = max(momentum_exchange_check(a, b) for a, b in zip(recs, recs[1:]))
    checks.append(Check("per-step total momentum drift", mom, math.inf, True, "recorded"))
    return checks


def determinism_check(threads=(1, 2, 4), t_final=0.1):
    outputs = {}
    for n in threads:
        lines = []
        run_manifest(reference_manifest(t_final=t_final), n, on_record=lambda r: lines.append(record_line(r)))
        outputs[n] = "\n".join(lines).encode()
    base = outputs[threads[0]]
    same = all(o == base for o in outputs.values())
    return Check(f"byte-identical NDJSON with threads {threads}", float(not same), 0.0, same)


# -- convergence -----------------------------------------------------------


def _foot_reference(x, v, a_fn, h, sub=4000):
    """RK4 backward integration of dX = V, dV = a(X) - V."""
    X, V = np.array(x, float), np.array(v, float)
    s = -h / sub

    def rhs(X, V):
        return V, a_fn(X) - V

    for _ in range(sub):
        k1 = rhs(X, V)
        k2 = rhs(X + 0.5 * s * k1[0], V + 0.5 * s * k1[1])
        k3 = rhs(X + 0.5 * s * k2[0], V + 0.5 * s * k2[1])
        k4 = rhs(X + s * k3[0], V + s * k3[1])
        X = X + s / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        V = V + s / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return X, V


def trace_back_errors(dts=(0.1, 0.05, 0.025)):
    """Foot errors of trace_back for a frozen smooth field in 2-D."""
    from .model import Model

    grid = PhaseGrid.build(2, 64, 8, 8.0)
    model = Model.build(grid, 0.1, regularized=False)
    u = FluidField(grid.spatial, taylor_green(grid.spatial, 1.0))

    def a_fn(X):
        return np.stack([np.sin(X[0]) * np.cos(X[1]), -np.cos(X[0]) * np.sin(X[1])])

    rng = np.random.default_rng(1)
    x = rng.uniform(0, 2 * np.pi, size=(2, 50))
    v = rng.uniform(-3, 3, size=(2, 50))
    errs = []
    for h in dts:
        foot = trace_back(x, v, u, model, h)
        Xr, Vr = _foot_reference(x, v, a_fn, h)
        dx = np.angle(np.exp(1j * (foot.X - Xr)))
        errs.append(float(max(np.max(np.abs(dx)), np.max(np.abs(foot.V - Vr)))))
    return errs


def picard_contraction(dt=1e-3, tol=1e-14, max_iter=12):
    """Picard trace of the first step of the reference configuration."""
    man = reference_manifest(dt=dt)
    grid = man.grid.build()
    f0, u0 = build_initial(grid, man.initial, man.config.epsilon)
    model = man.config.model(grid)
    try:
        res = picard_advance(f0, u0, model, dt, tol, max_iter)
        traces = res.traces
    except Exception as exc:  # PicardNotConverged still carries the trace
        traces = getattr(exc, "traces", [])
    norms = [t.df_norm + t.du_norm for t in traces]
    ratios = [b / a for a, b in zip(norms, norms[1:]) if a > 0]
    return norms, ratios


def longest_run_below(ratios, limit=0.5):
    best = cur = 0
    for r in ratios:
        cur = cur + 1 if r < limit else 0
        best = max(best, cur)
    return best


def suite_convergence():
    checks = []
    errs = trace_back_errors()
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    checks.append(
        Check("trace_back local order (>= 2.5)", min(orders), 2.5, min(orders) >= 2.5, f"errors={['%.2e' % e for e in errs]}")
    )
    norms, ratios = picard_contraction()
    run_len = longest_run_below(ratios)
    checks.append(
        Check("Picard ratios < 0.5 (consecutive)", run_len, 3, run_len >= 3, f"ratios={['%.1e' % r for r in ratios]}")
    )
    table = []
    for dt in (1e-3, 2e-3, 4e-3, 8e-3, 1.6e-2):
        _, r = picard_contraction(dt, tol=1e-13)
        table.append(float(r[0]) if r else math.nan)
    mono = all(b >= a for a, b in zip(table, table[1:]))
    checks.append(
        Check("first contraction ratio grows with dt", table[-1], math.inf, mono, f"table={['%.1e' % r for r in table]}")
    )
    return checks


# -- epsilon study ---------------------------------------------------------


def epsilon_study(epsilons=(0.2, 0.1, 0.05), t_final=0.2, dt=2e-3, nv=128, v_max=20.0):
    rows = []
    for eps in epsilons:
        man = RunManifest(
            SimConfig(epsilon=eps, dt=dt, t_final=t_final), GridConfig(v_max=v_max, nv=nv), InitialConfig()
        )
        traj, _ = run_manifest(man)
        recs = traj.records
        rows.append(
            {
                "epsilon": eps,
                "failure": traj.failure,
                "max_remnant": max(abs(r.remnant_estimate) for r in recs),
                "max_residual": max(abs(r.energy_balance_residual) for r in recs[1:]),
                "E0": recs[0].total_energy,
                "momentum_drift": max(momentum_exchange_check(a, b) for a, b in zip(recs, recs[1:])),
            }
        )
    return rows


def unregularized_budget(t_final=0.2, dt=2e-3):
    man = RunManifest(
        SimConfig(dt=dt, t_final=t_final, regularized_operators=False), GridConfig(), InitialConfig()
    )
    traj, _ = run_manifest(man)
    recs = traj.records
    return traj, max(abs(r.energy_balance_residual) for r in recs[1:]), recs[0].total_energy


def suite_epsilon_study():
    checks = []
    rows = epsilon_study()
    dt = 2e-3
    for row in rows:
        bound = 5 * dt**2 * row["E0"]
        ok = row["failure"] is None and row["max_residual"] <= bound
        checks.append(Check(f"energy residual eps={row['epsilon']}", row["max_residual"], bound, ok))
    rem = [row["max_remnant"] for row in rows]
    dec = all(b < a for a, b in zip(rem, rem[1:]))
    checks.append(Check("max |remnant| strictly decreasing in eps", rem[-1], rem[0], dec, f"{['%.3e' % r for r in rem]}"))
    drift = [row["momentum_drift"] for row in rows]
    checks.append(Check("momentum drift per eps (recorded)", drift[-1], math.inf, True, f"{['%.2e' % r for r in drift]}"))
    traj, res, E0 = unregularized_budget()
    bound = 5 * dt**2 * E0
    rem0 = max(abs(r.remnant_estimate) for r in traj.records)
    checks.append(Check("uncorrected residual, gamma=1 eta=id", res, bound, res <= bound and traj.failure is None))
    checks.append(Check("remnant vanishes, gamma=1 eta=id", rem0, 0.0, rem0 == 0.0))
    return checks


# -- analytic fluid and BGK cases ------------------------------------------


def taylor_green_errors(dts=(4e-3, 2e-3, 1e-3), mu=0.1, t=1.0, n=32):
    grid = PhaseGrid.build(2, n, 2, 1.0).spatial
    u0 = taylor_green(grid, 1.0)
    kernel = MollifierKernel.bump(grid, 0.1)
    amp = oracles.taylor_green(mu, t)["amplitude"]
    errs = []
    for dt in dts:
        u = FluidField(grid, u0)
        cfg = FluidStepConfig(mu, dt)
        for k in range(int(round(t / dt))):
            u = fluid_step(u, None, cfg, kernel, step=k)
        diff = u.values - amp * u0
        errs.append(float(np.sqrt(np.sum(diff**2) * grid.cell_volume)))
    return errs


def suite_fluid_analytic():
    errs = taylor_green_errors()
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    checks = [
        Check("Taylor-Green L2 error at dt=1e-3", errs[-1], 1e-6, errs[-1] <= 1e-6),
        Check(
            "Taylor-Green observed order ~ 2",
            orders[-1],
            2.0,
            all(1.8 <= o <= 2.2 for o in orders),
            f"errors={['%.2e' % e for e in errs]} orders={['%.3f' % o for o in orders]}",
        ),
    ]
    return checks


def bgk_homogeneous_errors(dts=(0.1, 0.05, 0.025), t=1.0):
    """Max-norm error of the drag-free homogeneous run against the relaxation closed form."""
    from .initial import gaussian

    grid = PhaseGrid.build(1, 4, 64, 10.0)
    f0v = 0.5 * gaussian(grid, 1.0, np.array([2.0]), 1.0) + 0.5 * gaussian(grid, 1.0, np.array([-2.0]), 1.0)
    f0 = DistributionField(grid, f0v)
    M = local_maxwellian(f0)
    exact = math.exp(-t) * f0v + (1 - math.exp(-t)) * M
    errs = []
    for dt in dts:
        cfg = SimConfig(dt=dt, t_final=t, drag_enabled=False, regularized_operators=False)
        traj = run(cfg, f0, FluidField.zeros(grid.spatial))
        errs.append(float(np.max(np.abs(traj.f.values - exact))))
    return errs


def suite_bgk_analytic():
    errs = bgk_homogeneous_errors()
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    ok = all(3.5 <= r <= 4.5 for r in ratios)
    return [Check("homogeneous BGK error ratios in [3.5, 4.5]", min(ratios), 3.5, ok, f"errors={['%.2e' % e for e in errs]} ratios={['%.3f' % r for r in ratios]}")]


def run_suite(name: str, threads: int = 1):
    if name == "lemmas":
        return suite_lemmas()
    if name == "conservation":
        return suite_conservation(threads) + [determinism_check()]
    if name == "convergence":
        return suite_convergence()
    if name == "epsilon_study":
        return suite_epsilon_study()
    if name == "fluid_analytic":
        return suite_fluid_analytic()
    if name == "bgk_analytic":
        return suite_bgk_analytic()
    raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
