"""Recessive profile of 4G''' + zG = 0 and the blow-up solution built on it.

Frozen reference constants below were obtained from Richardson-stable runs
of this module's own integrator at dz = 2.5e-4 cross-checked against the
rk4 path; z0 agrees between the two to 2e-10.
"""

import numpy as np
import pytest

from contactline import selfsimilar
from contactline.errors import (
    CertificationFailureError,
    DomainTooShortError,
    ValidationError,
)
from contactline.grid import build_grid

Z0 = -4.0825915386
G1_AT_Z0 = 4.7750687
G2_AT_Z0 = -4.2553469
C_DECAY = -0.10138580
GAMMA0 = 0.42270383
BETA_COEF = -0.48412417
F3_AT_0 = 0.43143165


@pytest.fixture(scope="module")
def profile():
    return selfsimilar.build_profile(dz=1e-3, t0=1.0)


def test_wkb_tail_satisfies_ode():
    # the tail formula solves 4G''' = -zG to the order kept in the expansion;
    # the relative defect shrinks as z grows
    defects = []
    for z in (20.0, 40.0, 80.0):
        eps = 1e-4 * z
        g0, g1, g2 = selfsimilar.wkb_tail(z)
        gp2 = selfsimilar.wkb_tail(z + eps)[2]
        gm2 = selfsimilar.wkb_tail(z - eps)[2]
        g3 = (gp2 - gm2) / (2.0 * eps)
        defects.append(abs(4.0 * g3 + z * g0) / abs(z * g0))
    assert defects[0] <= 1e-2
    assert defects[1] < defects[0]
    assert defects[2] < defects[1]


def test_wkb_tail_domain():
    with pytest.raises(ValidationError):
        selfsimilar.wkb_tail(5.0)


def test_integrate_validation():
    with pytest.raises(ValidationError):
        selfsimilar.integrate_ode(z_max=5.0)
    with pytest.raises(ValidationError):
        selfsimilar.integrate_ode(dz=-1e-3)
    with pytest.raises(ValidationError):
        selfsimilar.integrate_ode(method="euler")


def test_z0_frozen_value(profile):
    assert profile.z0 == pytest.approx(Z0, abs=1e-6)


def test_z0_richardson_stable():
    a = selfsimilar.build_profile(dz=1e-3)
    b = selfsimilar.build_profile(dz=5e-4)
    assert abs(a.z0 - b.z0) <= 1e-6


def test_methods_agree():
    a = selfsimilar.build_profile(dz=1e-3, method="heun")
    b = selfsimilar.build_profile(dz=1e-3, method="rk4")
    assert a.z0 == pytest.approx(b.z0, abs=1e-8)


def test_boundary_derivative_values(profile):
    assert profile.G1_at_z0 == pytest.approx(G1_AT_Z0, abs=1e-5)
    assert profile.G2_at_z0 == pytest.approx(G2_AT_Z0, abs=1e-5)


def test_blowup_constants(profile):
    assert profile.C == pytest.approx(C_DECAY, abs=1e-6)
    assert profile.V0 == pytest.approx(-Z0 / 4.0, rel=1e-9)
    assert profile.gamma0 == pytest.approx(GAMMA0, abs=1e-5)
    assert profile.beta_coefficient == pytest.approx(BETA_COEF, abs=1e-5)
    assert profile.f3_at_0 == pytest.approx(F3_AT_0, abs=1e-5)


def test_sign_structure(profile):
    rep = selfsimilar.certify_signs(profile)
    assert rep.z0 < 0
    assert rep.min_G_above_z0 > 0
    assert rep.monotone_decreasing_nonneg
    assert rep.G1_at_z0 > 0
    assert rep.G2_at_z0 < 0


def test_negated_profile_fails_certification(profile):
    flipped = selfsimilar.SelfSimilarProfile(
        profile.z_grid, -profile.G, -profile.G1, -profile.G2, profile.dz
    )
    flipped.z0 = profile.z0
    flipped.G1_at_z0 = -profile.G1_at_z0
    flipped.G2_at_z0 = -profile.G2_at_z0
    with pytest.raises(CertificationFailureError):
        selfsimilar.certify_signs(flipped)


def test_certify_requires_z0():
    p = selfsimilar.integrate_ode(dz=1e-2)
    with pytest.raises(ValidationError):
        selfsimilar.certify_signs(p)


def test_domain_too_short():
    p = selfsimilar.integrate_ode(z_min=-1.0, dz=1e-3)
    with pytest.raises(DomainTooShortError):
        selfsimilar.find_z0(p)


def test_profile_stable_under_seed_perturbation(profile):
    # the recessive direction is attracting under backward integration, so
    # a small non-collinear perturbation of the WKB seed barely moves z0
    dz = 1e-3
    nsteps = int(round((20.0 - (-15.0)) / dz))
    zs = 20.0 - dz * np.arange(nsteps + 1)
    y = np.array(selfsimilar.wkb_tail(20.0))
    y[1] *= 1.0 + 1e-6
    sol = np.empty((nsteps + 1, 3))
    sol[0] = y
    h = -dz
    for k in range(nsteps):
        f1 = selfsimilar._rhs(zs[k], y)
        f2 = selfsimilar._rhs(zs[k] + h, y + h * f1)
        y = y + 0.5 * h * (f1 + f2)
        sol[k + 1] = y
    zs = zs[::-1]
    G = sol[::-1, 0]
    neg = np.nonzero((zs[:-1] < 0) & (G[1:] > 0) & (G[:-1] <= 0))[0]
    k = neg[-1]
    z0 = zs[k] - G[k] * dz / (G[k + 1] - G[k])
    assert z0 == pytest.approx(profile.z0, abs=1e-4)


def test_normalization_modes():
    decay = selfsimilar.build_profile(dz=1e-3, normalization_mode="far-field-decay")
    flux = selfsimilar.build_profile(dz=1e-3, normalization_mode="flux-sign")
    assert decay.C < 0
    assert flux.C > 0
    assert flux.f3_at_0 == pytest.approx(-0.5, rel=1e-12)
    # far-field-decay drives f to zero at the end of the sampled tail
    assert abs(decay.f[-1]) <= 1e-10
    with pytest.raises(ValidationError):
        selfsimilar.reconstruct_f(decay, normalization_mode="unit")
    with pytest.raises(ValidationError):
        selfsimilar.reconstruct_f(decay, "flux-sign", f3_target=0.5)


def test_selfsim_field_and_speed(profile):
    g = build_grid(40.0, 2001)
    fld, V = selfsimilar.selfsim_field(0.0, profile, g)
    assert fld.values[0] == pytest.approx(1.0, abs=1e-10)
    assert V == pytest.approx(profile.t0 * profile.V0, rel=1e-12)
    # the sampled profile decays toward the far field
    assert abs(fld.values[-1]) <= 1e-8
    fld2, V2 = selfsimilar.selfsim_field(0.5, profile, g)
    assert V2 == pytest.approx(V / 0.5**0.75, rel=1e-12)
    with pytest.raises(ValidationError):
        selfsimilar.selfsim_field(1.0, profile, g)


def test_beta_scaling_of_sampled_fields(profile):
    # h_xx(0, t) of the closed-form solution follows (t0 - t)^{-1/2}
    from contactline.grid import boundary_derivative

    g = build_grid(40.0, 4001)
    vals = []
    for t in (0.0, 0.3, 0.6):
        fld, _ = selfsimilar.selfsim_field(t, profile, g)
        vals.append(boundary_derivative(fld, 2) * np.sqrt(profile.t0 - t))
    assert np.allclose(vals, profile.beta_coefficient, rtol=2e-3)
