"""Time integration of the fourth-order advection-diffusion problem with
the over-determining contact-line closure for the speed V(t).

Two schemes share the same spatial discretization (5-point fourth
derivative, central advection, accuracy-2 one-sided boundary rows):

* ``imex-affine``: backward Euler on the fourth derivative, explicit
  advection.  The update is affine in V, so two pentadiagonal solves give
  h = h_a + V h_b and the third boundary condition fixes V exactly.
* ``implicit-secant``: fully implicit step; a scalar secant iteration on V
  drives the third-boundary-condition defect to zero.

Boundary rows: h(0) fixed, one-sided h_x(0) = 0, and the far-field value
pinned at the last two nodes (validity certified by the far-field monitor).
"""

from dataclasses import dataclass, field as dfield, replace

import numpy as np

from .errors import (
    ClosureFailureError,
    DegenerateClosureError,
    NumericalFailureError,
    ValidationError,
)
from .grid import Field, Grid, StencilSet, boundary_derivative, build_grid
from . import diagnostics
from .kernels import make_solver

__all__ = [
    "RunConfig",
    "StepResult",
    "initial_profile",
    "ImexAffineStepper",
    "ImplicitSecantStepper",
    "step_imex_affine",
    "step_implicit_secant",
    "gauge_transform",
    "evolve",
]

_SCHEMES = ("imex-affine", "implicit-secant")
_THIRD_BC_MODES = ("flux", "selfsim")


@dataclass
class RunConfig:
    scheme: str = "imex-affine"
    dt: float = 1e-4
    L: float = 40.0
    n: int = 4001
    beta0_init: float = -1.0
    sigma: float = 0.3
    third_bc: str = "flux"
    gamma0: float | None = None
    farfield_value: float = 0.0
    farfield_tol: float = 1e-8
    t_max: float = 1.0
    beta_threshold: float = -1e-6
    v_threshold: float = 1e6
    snapshot_times: tuple = ()

    def __post_init__(self):
        if self.scheme not in _SCHEMES:
            raise ValidationError(f"unknown scheme {self.scheme!r}")
        if self.third_bc not in _THIRD_BC_MODES:
            raise ValidationError(f"unknown third-bc mode {self.third_bc!r}")
        if self.dt <= 0:
            raise ValidationError("dt must be positive")
        if self.beta0_init >= 0:
            raise ValidationError("beta0_init must be negative")
        if self.sigma <= 0:
            raise ValidationError("sigma must be positive")
        if self.third_bc == "selfsim" and self.gamma0 is None:
            raise ValidationError("selfsim third-bc mode requires gamma0")
        if self.t_max < 0:
            raise ValidationError("t_max must be non-negative")
        self.snapshot_times = tuple(self.snapshot_times)

    def grid(self):
        return build_grid(self.L, self.n)


@dataclass
class StepResult:
    field: Field
    V: float
    closure_iterations: int
    closure_residual: float


def initial_profile(beta0, sigma, grid):
    """Compatible initial data: h0(0)=1, h0'(0)=0, h0''(0)=beta0,
    h0'''(0)=-1/2, decaying under a quartic-exponential envelope whose
    derivatives of orders 1-3 vanish at the origin."""
    if beta0 >= 0:
        raise ValidationError("beta0 must be negative")
    if sigma <= 0:
        raise ValidationError("sigma must be positive")
    x = grid.x
    vals = (1.0 + 0.5 * beta0 * x**2 - x**3 / 12.0) * np.exp(-((sigma * x) ** 4))
    return Field(grid, vals, 0.0)


class _StepperBase:
    def __init__(self, grid, dt, third_bc="flux", gamma0=None,
                 farfield_value=0.0, stencils=None):
        if dt <= 0:
            raise ValidationError("dt must be positive")
        if third_bc not in _THIRD_BC_MODES:
            raise ValidationError(f"unknown third-bc mode {third_bc!r}")
        if third_bc == "selfsim" and gamma0 is None:
            raise ValidationError("selfsim mode requires gamma0")
        self.grid = grid
        self.dt = dt
        self.third_bc = third_bc
        self.gamma0 = gamma0
        self.farfield_value = farfield_value
        st = stencils or StencilSet()
        self.stencils = st
        dx = grid.dx
        self._s3 = st.one_sided[3] / dx**3          # closure functional at x=0
        self._sx = st.one_sided[1] / dx             # h_x(0) boundary row
        self._dx = dx

    def _diffusion_diagonals(self):
        """Diagonals of I + dt*D4 with the four boundary rows installed."""
        n = self.grid.n
        r = self.dt / self._dx**4
        l2 = np.zeros(n)
        l1 = np.zeros(n)
        d = np.zeros(n)
        u1 = np.zeros(n)
        u2 = np.zeros(n)
        l2[2 : n - 2] = r
        l1[2 : n - 2] = -4.0 * r
        d[2 : n - 2] = 1.0 + 6.0 * r
        u1[2 : n - 2] = -4.0 * r
        u2[2 : n - 2] = r
        d[0] = 1.0
        # one-sided h_x(0)=0 row sits at row 1 (columns 0..2)
        l1[1], d[1], u1[1] = self._sx
        d[n - 2] = 1.0
        d[n - 1] = 1.0
        return l2, l1, d, u1, u2

    def _advect(self, values):
        """Central first derivative, zero at the boundary rows (those rows
        are overwritten by boundary conditions anyway)."""
        out = np.zeros_like(values)
        out[1:-1] = (values[2:] - values[:-2]) / (2.0 * self._dx)
        return out

    def _targets(self, t_new, bc_value, third_target):
        hval = 1.0 if bc_value is None else bc_value(t_new)
        if third_target is not None:
            return hval, third_target(t_new), None
        if self.third_bc == "flux":
            return hval, -0.5, None
        return hval, None, self.gamma0


class ImexAffineStepper(_StepperBase):
    """Backward Euler diffusion + explicit advection; exact scalar closure."""

    def __init__(self, *args, backend=None, **kwargs):
        super().__init__(*args, **kwargs)
        self._solver = make_solver(*self._diffusion_diagonals(), backend=backend)

    def step(self, fld, source=None, bc_value=None, third_target=None):
        n = self.grid.n
        h = fld.values
        t_new = fld.time + self.dt
        hval, target, gamma0 = self._targets(t_new, bc_value, third_target)

        ba = h.copy()
        if source is not None:
            ba = ba + self.dt * source(self.grid.x, t_new)
        ba[0] = hval
        ba[1] = 0.0
        ba[-2] = self.farfield_value
        ba[-1] = self.farfield_value
        bb = self.dt * self._advect(h)
        bb[0] = bb[1] = bb[-2] = bb[-1] = 0.0

        ha = self._solver.solve(ba)
        hb = self._solver.solve(bb)
        Ta = float(self._s3 @ ha[:5])
        Tb = float(self._s3 @ hb[:5])
        if gamma0 is None:
            if abs(Tb) < 1e-14:
                raise DegenerateClosureError(
                    "third-bc functional insensitive to V (|T h_b| < 1e-14)"
                )
            V = (target - Ta) / Tb
        else:
            denom = gamma0 - Tb
            if abs(denom) < 1e-14:
                raise DegenerateClosureError(
                    "self-similar closure degenerate (|gamma0 - T h_b| < 1e-14)"
                )
            V = Ta / denom
            target = gamma0 * V
        h_new = ha + V * hb
        if not np.all(np.isfinite(h_new)):
            raise NumericalFailureError("non-finite values after step")
        resid = abs(float(self._s3 @ h_new[:5]) - target)
        return StepResult(Field(self.grid, h_new, t_new), V, 1, resid)


class ImplicitSecantStepper(_StepperBase):
    """Fully implicit step with secant iteration on the closure defect."""

    max_iterations = 50
    tolerance = 1e-10

    def __init__(self, *args, backend=None, **kwargs):
        super().__init__(*args, **kwargs)
        self._backend = backend
        self._base = self._diffusion_diagonals()

    def _solve_for(self, V, rhs):
        l2, l1, d, u1, u2 = (a.copy() for a in self._base)
        n = self.grid.n
        c = self.dt * V / (2.0 * self._dx)
        l1[2 : n - 2] += c
        u1[2 : n - 2] -= c
        solver = make_solver(l2, l1, d, u1, u2, backend=self._backend)
        return solver.solve(rhs)

    def step(self, fld, V_guess=0.0, source=None, bc_value=None, third_target=None):
        t_new = fld.time + self.dt
        hval, target, gamma0 = self._targets(t_new, bc_value, third_target)
        rhs = fld.values.copy()
        if source is not None:
            rhs = rhs + self.dt * source(self.grid.x, t_new)
        rhs[0] = hval
        rhs[1] = 0.0
        rhs[-2] = self.farfield_value
        rhs[-1] = self.farfield_value

        def defect(V):
            h = self._solve_for(V, rhs)
            T = float(self._s3 @ h[:5])
            if gamma0 is None:
                return T - target, h
            return T - gamma0 * V, h

        V0 = V_guess
        V1 = V_guess + max(1e-3, 1e-3 * abs(V_guess))
        s0, _ = defect(V0)
        s1, h1 = defect(V1)
        iters = 2
        while abs(s1) > self.tolerance and iters < self.max_iterations:
            if s1 == s0:
                raise ClosureFailureError("secant stalled", residual=abs(s1))
            V2 = V1 - s1 * (V1 - V0) / (s1 - s0)
            if not np.isfinite(V2):
                raise ClosureFailureError("secant diverged", residual=abs(s1))
            V0, s0 = V1, s1
            V1 = V2
            s1, h1 = defect(V1)
            iters += 1
        if abs(s1) > self.tolerance:
            raise ClosureFailureError(
                f"secant did not converge in {self.max_iterations} iterations",
                residual=abs(s1),
            )
        if not np.all(np.isfinite(h1)):
            raise NumericalFailureError("non-finite values after step")
        return StepResult(Field(self.grid, h1, t_new), float(V1), iters, abs(s1))


def step_imex_affine(fld, dt, config, **kwargs):
    """One-shot convenience wrapper around :class:`ImexAffineStepper`."""
    stp = ImexAffineStepper(
        fld.grid, dt, config.third_bc, config.gamma0, config.farfield_value
    )
    return stp.step(fld, **kwargs)


def step_implicit_secant(fld, dt, V_guess, config, **kwargs):
    stp = ImplicitSecantStepper(
        fld.grid, dt, config.third_bc, config.gamma0, config.farfield_value
    )
    return stp.step(fld, V_guess=V_guess, **kwargs)


def gauge_transform(fld, V_of_t, H):
    """Shift-scaling covariance map.

    Returns the transformed field (on a rescaled grid, at rescaled time)
    and the transformed speed function t -> V(t/(1-H)^{4/3})/(1-H).
    """
    if H >= 1:
        raise ValidationError("gauge parameter H must satisfy H < 1")
    s = 1.0 - H
    new_grid = build_grid(fld.grid.L * s ** (1.0 / 3.0), fld.grid.n)
    new_vals = H + s * fld.values
    new_field = Field(new_grid, new_vals, fld.time * s ** (4.0 / 3.0))

    def v_new(t):
        return V_of_t(t / s ** (4.0 / 3.0)) / s

    return new_field, v_new


def _initial_speed(fld):
    """Speed implied by the pointwise contact equation for the initial
    record: V = h_xxxxx(0)/beta."""
    beta = boundary_derivative(fld, 2)
    if abs(beta) < 1e-12:
        return float("nan")
    return boundary_derivative(fld, 5) / beta


def evolve(config, initial_field=None, source=None, bc_value=None,
           third_target=None):
    """Run the configured evolution; returns (trace, snapshots).

    Halts on t_max, on beta crossing the non-physicality threshold from
    below, on |V| exceeding the speed threshold, or on far-field
    contamination; the reason is recorded on the trace.
    """
    grid = config.grid()
    fld = initial_field if initial_field is not None else initial_profile(
        config.beta0_init, config.sigma, grid
    )
    if fld.grid.n != grid.n:
        raise ValidationError("initial field does not match configured grid")

    if config.scheme == "imex-affine":
        stepper = ImexAffineStepper(
            grid, config.dt, config.third_bc, config.gamma0, config.farfield_value
        )
    else:
        stepper = ImplicitSecantStepper(
            grid, config.dt, config.third_bc, config.gamma0, config.farfield_value
        )

    records = [diagnostics.trace_record(fld, _initial_speed(fld))]
    snapshots = [fld] if 0.0 in config.snapshot_times else []
    pending = sorted(t for t in config.snapshot_times if t > 0.0)
    halt = "t_max"
    V = records[0]["V"]
    nsteps = int(round(config.t_max / config.dt))
    for k in range(nsteps):
        kwargs = dict(source=source, bc_value=bc_value, third_target=third_target)
        try:
            if config.scheme == "imex-affine":
                res = stepper.step(fld, **kwargs)
            else:
                guess = V if np.isfinite(V) else 0.0
                res = stepper.step(fld, V_guess=guess, **kwargs)
        except (NumericalFailureError, ClosureFailureError) as exc:
            raise NumericalFailureError(f"step {k + 1} failed: {exc}") from exc
        fld, V = res.field, res.V
        rec = diagnostics.trace_record(fld, V)
        records.append(rec)
        while pending and fld.time >= pending[0] - 0.5 * config.dt:
            snapshots.append(fld)
            pending.pop(0)
        if rec["beta"] >= config.beta_threshold:
            halt = "nonphysical-beta"
            break
        if abs(V) >= config.v_threshold:
            halt = "v-threshold"
            break
        if rec["farfield"] > config.farfield_tol:
            halt = "farfield-violation"
            break
    return diagnostics.Trace.from_records(records, halt), snapshots
