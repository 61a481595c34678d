"""Self-similar blow-up profile: the recessive solution of 4G''' + zG = 0.

The decaying solution is seeded from its WKB tail at large z and integrated
backward (the directions that oscillate and diverge at +infinity shrink
under backward integration, so the recessive solution is captured stably).
The largest negative zero z0 of G, its derivative values there, and the
reconstructed contact-line profile f define the closed-form blow-up
solution h(x,t) = f(x/(t0-t)^{1/4}) with V(t) = t0*V0/(t0-t)^{3/4}.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import (
    CertificationFailureError,
    DomainTooShortError,
    NumericalFailureError,
    ValidationError,
)
from .grid import Field

__all__ = [
    "SelfSimilarProfile",
    "wkb_tail",
    "integrate_ode",
    "find_z0",
    "certify_signs",
    "reconstruct_f",
    "selfsim_field",
    "build_profile",
]

_DECAY = 3.0 / 2.0 ** (8.0 / 3.0)  # exponent coefficient of the tail
_Z_ASYMPTOTIC = 10.0


@dataclass
class SelfSimilarProfile:
    """Sampled recessive solution and the derived blow-up constants."""

    z_grid: np.ndarray            # ascending
    G: np.ndarray
    G1: np.ndarray
    G2: np.ndarray
    dz: float
    z0: float | None = None
    G1_at_z0: float | None = None
    G2_at_z0: float | None = None
    C: float | None = None        # normalization of g = C*G
    t0: float | None = None
    normalization_mode: str | None = None
    xi: np.ndarray | None = None  # similarity coordinate grid (from 0)
    f: np.ndarray | None = None

    @property
    def V0(self):
        # z0 = -4*t0*V0
        if self.z0 is None or self.t0 is None:
            return None
        return -self.z0 / (4.0 * self.t0)

    @property
    def f3_at_0(self):
        # f'''(0) = g''(0 in xi) = C * G''(z0)
        if self.C is None or self.G2_at_z0 is None:
            return None
        return self.C * self.G2_at_z0

    @property
    def gamma0(self):
        if self.f3_at_0 is None or self.t0 is None:
            return None
        return self.f3_at_0 / (self.t0 * self.V0)

    @property
    def beta_coefficient(self):
        # beta(t) = C*G'(z0) / (t0 - t)^{1/2}
        if self.C is None or self.G1_at_z0 is None:
            return None
        return self.C * self.G1_at_z0

    def splines(self):
        return (
            CubicSpline(self.z_grid, self.G),
            CubicSpline(self.z_grid, self.G1),
            CubicSpline(self.z_grid, self.G2),
        )


def wkb_tail(z):
    """Leading tail values (G, G', G'') from
    G(z) = exp(-3 z^{4/3} / 2^{8/3}) * z^{-1/3}, differentiated exactly."""
    if z < _Z_ASYMPTOTIC:
        raise ValidationError(f"tail formula valid for z >= {_Z_ASYMPTOTIC}, got {z}")
    g = np.exp(-_DECAY * z ** (4.0 / 3.0)) * z ** (-1.0 / 3.0)
    # logarithmic derivative and its derivative
    phi = -(4.0 * _DECAY / 3.0) * z ** (1.0 / 3.0) - 1.0 / (3.0 * z)
    phi1 = -(4.0 * _DECAY / 9.0) * z ** (-2.0 / 3.0) + 1.0 / (3.0 * z * z)
    return g, phi * g, (phi1 + phi * phi) * g


def _rhs(z, y):
    return np.array([y[1], y[2], -0.25 * z * y[0]])


def integrate_ode(z_max=20.0, z_min=-15.0, dz=1e-3, method="heun"):
    """Backward integration of the first-order system from the WKB seed.

    ``method`` is "heun" (default, second order) or "rk4"."""
    if not (z_max >= _Z_ASYMPTOTIC > z_min):
        raise ValidationError("require z_max >= 10 > z_min")
    if dz <= 0:
        raise ValidationError("dz must be positive")
    if method not in ("heun", "rk4"):
        raise ValidationError(f"unknown method {method!r}")
    nsteps = int(round((z_max - z_min) / dz))
    zs = z_max - dz * np.arange(nsteps + 1)
    ys = np.empty((nsteps + 1, 3))
    y = np.array(wkb_tail(z_max))
    ys[0] = y
    h = -dz
    for k in range(nsteps):
        z = zs[k]
        f1 = _rhs(z, y)
        if method == "heun":
            f2 = _rhs(z + h, y + h * f1)
            y = y + 0.5 * h * (f1 + f2)
        else:
            f2 = _rhs(z + 0.5 * h, y + 0.5 * h * f1)
            f3 = _rhs(z + 0.5 * h, y + 0.5 * h * f2)
            f4 = _rhs(z + h, y + h * f3)
            y = y + (h / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4)
        if not np.all(np.isfinite(y)):
            raise NumericalFailureError(f"integration blew up near z = {zs[k + 1]}")
        ys[k + 1] = y
    # ascending order; normalize so G(0) = 1 (scale is arbitrary)
    zs = zs[::-1].copy()
    ys = ys[::-1].copy()
    scale = float(np.interp(0.0, zs, ys[:, 0]))
    if scale <= 0:
        raise NumericalFailureError("profile not positive at z = 0")
    ys /= scale
    return SelfSimilarProfile(zs, ys[:, 0], ys[:, 1], ys[:, 2], dz)


def find_z0(profile):
    """Largest negative zero of G, refined on the cubic interpolant."""
    zs = profile.z_grid
    G = profile.G
    neg = np.nonzero((zs[:-1] < 0) & (G[1:] > 0) & (G[:-1] <= 0))[0]
    if neg.size == 0:
        raise DomainTooShortError(
            "no sign change of G found at negative z; lower z_min"
        )
    k = neg[-1]  # largest such z
    csG, cs1, cs2 = profile.splines()
    z0 = brentq(csG, zs[k], zs[k + 1], xtol=1e-14)
    profile.z0 = float(z0)
    profile.G1_at_z0 = float(cs1(z0))
    profile.G2_at_z0 = float(cs2(z0))
    return profile.z0


@dataclass
class SignReport:
    z0: float
    min_G_above_z0: float
    monotone_decreasing_nonneg: bool
    G1_at_z0: float
    G2_at_z0: float


def certify_signs(profile):
    """Assert the sign structure of the recessive profile:
    G > 0 on (z0, z_max], G'(z0) > 0, G''(z0) < 0, G decreasing on z >= 0."""
    if profile.z0 is None:
        raise ValidationError("locate z0 before certifying signs")
    zs = profile.z_grid
    mask = zs > profile.z0 + 2.0 * profile.dz
    min_G = float(np.min(profile.G[mask]))
    if min_G <= 0:
        raise CertificationFailureError("G not positive on (z0, z_max]")
    pos = zs >= 0.0
    monotone = bool(np.all(np.diff(profile.G[pos]) < 0))
    if not monotone:
        raise CertificationFailureError("G not monotone decreasing on z >= 0")
    if not profile.G1_at_z0 > 0:
        raise CertificationFailureError("G'(z0) not positive")
    if not profile.G2_at_z0 < 0:
        raise CertificationFailureError("G''(z0) not negative")
    if not profile.z0 < 0:
        raise CertificationFailureError("z0 not negative")
    return SignReport(
        profile.z0, min_G, monotone, profile.G1_at_z0, profile.G2_at_z0
    )


def reconstruct_f(profile, normalization_mode="far-field-decay", f3_target=-0.5):
    """Contact-line profile f(xi) = 1 + C * int_0^xi G(s + z0) ds.

    flux-sign mode: C > 0 chosen so f'''(0) = C G''(z0) equals the
    prescribed negative ``f3_target``.  far-field-decay mode: C < 0 chosen
    so f decays to 0 at the far end of the sampled tail.
    """
    if profile.z0 is None:
        raise ValidationError("locate z0 before reconstructing f")
    if normalization_mode not in ("flux-sign", "far-field-decay"):
        raise ValidationError(f"unknown normalization mode {normalization_mode!r}")
    csG, _, _ = profile.splines()
    xi = profile.z_grid[profile.z_grid >= profile.z0] - profile.z0
    xi = np.concatenate(([0.0], xi[xi > 0]))
    Gxi = csG(xi + profile.z0)
    integral = cumulative_trapezoid(Gxi, xi, initial=0.0)
    if normalization_mode == "flux-sign":
        if f3_target >= 0:
            raise ValidationError("flux-sign mode requires a negative f'''(0)")
        C = f3_target / profile.G2_at_z0  # both negative => C > 0
    else:
        total = integral[-1]
        if total <= 0:
            raise ValidationError("tail sampling gives non-integrable G")
        C = -1.0 / total
    profile.C = float(C)
    profile.normalization_mode = normalization_mode
    profile.xi = xi
    profile.f = 1.0 + C * integral
    return profile.xi, profile.f


def selfsim_field(t, profile, grid):
    """Sample the closed-form blow-up solution on a PDE grid; returns
    (field, exact V(t))."""
    if profile.t0 is None:
        raise ValidationError("profile.t0 must be set")
    if profile.f is None:
        raise ValidationError("reconstruct f before sampling")
    if not 0.0 <= t < profile.t0:
        raise ValidationError(f"need 0 <= t < t0 = {profile.t0}, got {t}")
    scale = (profile.t0 - t) ** 0.25
    xi = grid.x / scale
    csf = CubicSpline(profile.xi, profile.f)
    vals = np.where(xi <= profile.xi[-1], csf(np.clip(xi, 0.0, profile.xi[-1])), 0.0)
    V = profile.t0 * profile.V0 / (profile.t0 - t) ** 0.75
    return Field(grid, vals, t), float(V)


def exact_speed(t, profile):
    return profile.t0 * profile.V0 / (profile.t0 - t) ** 0.75


def build_profile(z_max=20.0, z_min=-15.0, dz=1e-3, method="heun", t0=1.0,
                  normalization_mode="far-field-decay", f3_target=-0.5):
    """Full pipeline: integrate, locate z0, certify, reconstruct f."""
    profile = integrate_ode(z_max, z_min, dz, method)
    find_z0(profile)
    certify_signs(profile)
    profile.t0 = float(t0)
    reconstruct_f(profile, normalization_mode, f3_target)
    return profile
