import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsbgk import oracles
from nsbgk.coupling import SimConfig, run
from nsbgk.diagnostics import (
    energy_balance,
    entropy_report,
    measure,
    momentum_exchange_check,
    remnant_rate,
    theorem_bounds_check,
)
from nsbgk.fields import DistributionField, FluidField
from nsbgk.grid import PhaseGrid
from nsbgk.initial import InitialConfig, build_initial, gaussian
from nsbgk.model import Model

GRID = PhaseGrid.build(1, 16, 96, 12.0)


@pytest.mark.parametrize("rho,T", [(1.0, 1.0), (2.5, 0.5), (0.3, 2.0)])
def test_uniform_maxwellian_entropy(rho, T):
    f = DistributionField(GRID, gaussian(GRID, rho, np.zeros(1), T))
    rep = entropy_report(f)
    ref = oracles.gaussian_entropy(rho, T, 1, GRID.spatial.volume)["H"]
    assert math.isclose(rep.H, ref, rel_tol=1e-9)
    assert abs(rep.D) < 1e-12 * rho


def test_entropy_rejects_negative_values():
    vals = gaussian(GRID, 1.0, np.zeros(1), 1.0)
    vals[0, 0] = -1e-3
    with pytest.raises(ValueError):
        entropy_report(DistributionField(GRID, vals))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.5, 3.0))
def test_dissipation_is_nonnegative(seed, shift):
    rng = np.random.default_rng(seed)
    x = GRID.spatial.points[0]
    w = rng.uniform(0.1, 0.9)
    U = np.array([shift * np.cos(x + rng.uniform(0, 6))])
    vals = w * gaussian(GRID, 1 + 0.3 * np.sin(x), U, rng.uniform(0.5, 1.5))
    vals = vals + (1 - w) * gaussian(GRID, 1.0, -U, rng.uniform(0.5, 1.5))
    rep = entropy_report(DistributionField(GRID, vals))
    assert rep.D >= 0
    # the discrete Maxwellian carries the discrete moments, so the cross term is round-off
    assert abs(rep.cross) <= 1e-10 * rep.cross_scale


def test_empty_gas_budget():
    model = Model.build(GRID, 0.1)
    f = DistributionField.zeros(GRID)
    u = FluidField.zeros(GRID.spatial)
    res, rem = energy_balance(f, u, f, u, 1e-2, model)
    assert res == 0 and rem == 0
    rec = measure(f, u, model, 0.0)
    assert rec.entropy == 0 and rec.dissipation == 0 and rec.linf == 0


def test_remnant_vanishes_without_regularization():
    model = Model.build(GRID, 0.1, regularized=False)
    f, u = build_initial(GRID, InitialConfig(), 0.1)
    assert remnant_rate(f, u, model) == 0


def test_fluid_momentum_drift_without_particles():
    sg = PhaseGrid.build(2, 16, 8, 10.0)
    f, u = build_initial(sg, InitialConfig(kind="taylor_green", regularize=False), 0.1)
    traj = run(SimConfig(dt=1e-2, t_final=5e-2, epsilon=0.1), f, u)
    drift = max(momentum_exchange_check(traj.records[0], r) for r in traj.records)
    assert drift <= 1e-12


@pytest.fixture(scope="module")
def short_run():
    f, u = build_initial(GRID, InitialConfig(), 0.1)
    cfg = SimConfig(dt=1e-2, t_final=0.1)
    return run(cfg, f, u), cfg


def test_bounds_hold_on_short_run(short_run):
    traj, cfg = short_run
    rep = theorem_bounds_check(traj.records, GRID, cfg.dt)
    assert rep.passed, [c for c in rep.checks if not c.passed]
    assert {c.name for c in rep.checks} == {"sup_norm_growth", "energy_budget", "dissipation_sign", "entropy_bound"}


def test_injected_negative_dissipation_fails(short_run):
    traj, cfg = short_run
    recs = list(traj.records)
    recs[3] = replace(recs[3], dissipation=-1e-6)
    rep = theorem_bounds_check(recs, GRID, cfg.dt)
    failed = {c.name for c in rep.checks if not c.passed}
    assert failed == {"dissipation_sign"}


def test_injected_energy_gain_fails(short_run):
    traj, cfg = short_run
    recs = list(traj.records)
    recs[-1] = replace(recs[-1], fluid_energy=recs[-1].fluid_energy + 1.0)
    rep = theorem_bounds_check(recs, GRID, cfg.dt)
    assert "energy_budget" in {c.name for c in rep.checks if not c.passed}


def test_record_serializes_plain_types(short_run):
    traj, _ = short_run
    d = traj.records[-1].to_dict()
    assert set(d) >= {"t", "mass", "m2", "m3", "entropy", "dissipation", "clipped_mass", "flag"}
    assert all(isinstance(v, (int, float, list, str, type(None))) for v in d.values())


def test_unregularized_momentum_drift_is_second_order():
    from nsbgk.validation import unregularized_budget

    drifts = []
    for dt in (4e-3, 2e-3):
        traj, _, E0 = unregularized_budget(0.04, dt)
        r = traj.records
        drift = max(momentum_exchange_check(a, b) for a, b in zip(r, r[1:]))
        assert drift <= dt**2 * E0
        drifts.append(drift)
    assert drifts[0] / drifts[1] >= 3.5
