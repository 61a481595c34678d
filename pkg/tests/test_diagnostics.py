"""Trace bookkeeping, energy balances, pointwise residuals, existence
budgets, and the far-field monitor."""

import numpy as np
import pytest

from contactline import diagnostics
from contactline.diagnostics import TRACE_COLUMNS, Trace
from contactline.errors import ValidationError
from contactline.grid import Field, build_grid
from contactline.stepper import RunConfig, evolve, initial_profile


def _trace(count=10, **overrides):
    t = np.linspace(0.0, 1.0, count)
    data = {c: np.ones(count) for c in TRACE_COLUMNS}
    data["t"] = t
    data["beta"] = -np.ones(count)
    data.update(overrides)
    return Trace(data)


def test_trace_validation():
    with pytest.raises(ValidationError):
        _trace(t=np.zeros(10))  # not strictly increasing
    with pytest.raises(ValidationError):
        _trace(E_h=-np.ones(10))
    with pytest.raises(ValidationError):
        Trace({"t": [0.0]})  # missing columns


def test_first_nonphysical_time():
    tr = _trace(count=5, beta=np.array([-1.0, -0.5, -1e-9, -0.4, 0.1]))
    assert tr.first_nonphysical_time() == pytest.approx(0.5)
    tr = _trace(count=5)
    tr.data["beta"] = -np.ones(5)
    assert tr.first_nonphysical_time() is None


def test_compute_u_vanishes_at_contact_line():
    g = build_grid(40.0, 2001)
    fld = initial_profile(-1.0, 0.3, g)
    u = diagnostics.compute_u(fld)
    assert abs(u.values[0]) <= 1e-4  # O(dx^2)


def test_compute_u_constant_field():
    g = build_grid(10.0, 101)
    u = diagnostics.compute_u(Field(g, np.ones(101)))
    assert np.max(np.abs(u.values)) <= 1e-12


def test_compute_u_closed_form():
    g = build_grid(10.0, 2001)
    fld = Field(g, np.sin(g.x))
    u = diagnostics.compute_u(fld)
    assert np.max(np.abs(u.values - np.cos(g.x))) <= 1e-5


def test_farfield_monitor_decaying_vs_truncated():
    g = build_grid(40.0, 2001)
    assert diagnostics.farfield_monitor(Field(g, np.exp(-g.x))) <= 1e-8
    short = build_grid(10.0, 501)
    assert diagnostics.farfield_monitor(Field(short, np.exp(-short.x))) > 1e-8


def test_trace_record_fields():
    g = build_grid(40.0, 2001)
    fld = initial_profile(-1.0, 0.3, g)
    rec = diagnostics.trace_record(fld, 0.0)
    assert set(rec) == set(TRACE_COLUMNS)
    assert rec["beta"] == pytest.approx(-1.0, abs=1e-3)
    assert rec["E_h"] > 0 and rec["D_h"] > 0
    assert rec["E_ux"] == rec["D_h"]  # both are ||h_xx||^2


def test_energy_balance_steady_state_zero_residual():
    # constant records with 2*D = rhs make every interval residual vanish
    count = 12
    V = -2.0
    q = -0.5
    tr = _trace(
        count,
        V=np.full(count, V),
        D_h=np.full(count, 0.5 * (2.0 * q - V)),
        E_h=np.full(count, 3.0),
    )
    rep = diagnostics.energy_balance(tr, "h-energy")
    assert rep.max_residual <= 1e-14


def test_energy_balance_unknown_identity():
    with pytest.raises(ValidationError):
        diagnostics.energy_balance(_trace(), "entropy")
    with pytest.raises(ValidationError):
        diagnostics.energy_balance(_trace(count=2), "h-energy")


def test_energy_balance_detects_injected_error():
    count = 12
    V = -2.0
    q = -0.5
    D = np.full(count, 0.5 * (2.0 * q - V))
    D[6] += 0.1  # corrupt one dissipation record
    tr = _trace(count, V=np.full(count, V), D_h=D, E_h=np.full(count, 3.0))
    rep = diagnostics.energy_balance(tr, "h-energy")
    assert rep.max_residual == pytest.approx(0.1, rel=1e-10)


def test_pointwise_residuals_on_run():
    config = RunConfig(dt=1e-4, n=1001, t_max=5e-3)
    trace, _ = evolve(config)
    r1 = diagnostics.energy_balance(trace, "pointwise-1")
    late = r1.times >= 2e-3
    assert np.max(np.abs(r1.residuals[late])) <= 0.05


def test_pointwise_residuals_function():
    g = build_grid(40.0, 2001)
    fld = initial_profile(-1.0, 0.3, g)
    from contactline.grid import boundary_derivative

    beta = boundary_derivative(fld, 2)
    a4 = boundary_derivative(fld, 5)
    V = a4 / beta
    r1, r2 = diagnostics.pointwise_residuals(fld, V, beta_dot=0.0)
    assert r1 == pytest.approx(0.0, abs=1e-12)
    assert np.isfinite(r2)


def test_existence_budget_consistency():
    config = RunConfig(dt=5e-4, n=1001, t_max=0.2, farfield_tol=np.inf,
                       beta_threshold=np.inf, v_threshold=np.inf)
    trace, _ = evolve(config)
    rep = diagnostics.existence_bound_check(trace)
    assert rep.consistent
    # the integrated identity defect tracks the per-interval residual scale
    bal = diagnostics.energy_balance(trace, "h-energy")
    late = bal.times >= 0.05
    assert rep.residual_h <= 4.0 * np.max(np.abs(bal.residuals[late])) \
        * trace["t"][-1] + 1.0


def test_existence_budget_bounds():
    # synthetic trace in the Theorem-1 regime: V bounded below by V0 > -1
    count = 40
    t = np.linspace(0.0, 0.1, count)
    E0 = 2.0
    V = np.full(count, -0.5)
    D = np.zeros(count)
    E = E0 - 0.5 * t  # d/dt E = -(1 + V) with V = -0.5
    tr = _trace(count, t=t, V=V, E_h=E, D_h=D)
    rep = diagnostics.existence_bound_check(tr)
    assert rep.residual_h <= 1e-12
    assert rep.inf_V == -0.5
    assert rep.bound_h == pytest.approx(E0 / 0.5)
    assert rep.consistent


def test_existence_budget_theorem2_bound():
    count = 40
    t = np.linspace(0.0, 0.1, count)
    beta = np.full(count, -2.0)
    E_u = 1.0 - 2.0 * t  # d/dt ||u||^2 = beta with zero dissipation
    tr = _trace(count, t=t, beta=beta, E_u=E_u, D_u=np.zeros(count))
    rep = diagnostics.existence_bound_check(tr)
    assert rep.residual_u <= 1e-12
    assert rep.sup_beta == -2.0
    assert rep.bound_u == pytest.approx(0.5)
