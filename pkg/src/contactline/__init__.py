"""Finite-time singularity formation at a moving contact line.

Simulates the fourth-order linear advection-diffusion problem on a
truncated half-line with an over-determining boundary closure for the
speed V(t), constructs the self-similar blow-up profile, monitors energy
identities, and fits candidate blow-up laws.
"""

from .grid import Field, Grid, StencilSet, apply_derivative, boundary_derivative, \
    build_grid, l2_norm_sq
from .stepper import RunConfig, StepResult, evolve, gauge_transform, \
    initial_profile, step_imex_affine, step_implicit_secant
from .selfsimilar import SelfSimilarProfile, build_profile, selfsim_field
from .diagnostics import Trace, compute_u, energy_balance, existence_bound_check, \
    farfield_monitor, pointwise_residuals
from .blowup import RateFit, detect_window, fit_log, fit_selfsim, fit_sqrt, \
    select_model
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "Field", "Grid", "StencilSet", "apply_derivative", "boundary_derivative",
    "build_grid", "l2_norm_sq",
    "RunConfig", "StepResult", "evolve", "gauge_transform", "initial_profile",
    "step_imex_affine", "step_implicit_secant",
    "SelfSimilarProfile", "build_profile", "selfsim_field",
    "Trace", "compute_u", "energy_balance", "existence_bound_check",
    "farfield_monitor", "pointwise_residuals",
    "RateFit", "detect_window", "fit_log", "fit_selfsim", "fit_sqrt",
    "select_model",
    "BACKEND", "__version__",
]
