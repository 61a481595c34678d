"""Grids, stencils, derivative operators, and quadrature."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from contactline.errors import ValidationError
from contactline.grid import (
    Field,
    Grid,
    StencilSet,
    apply_derivative,
    boundary_derivative,
    build_grid,
    l2_norm_sq,
    one_sided_coefficients,
)


def test_grid_properties():
    g = build_grid(10.0, 101)
    assert g.dx == pytest.approx(0.1)
    assert g.x[0] == 0.0
    assert g.x[-1] == pytest.approx(10.0)
    assert len(g.x) == 101


def test_grid_validation():
    with pytest.raises(ValidationError):
        build_grid(-1.0, 101)
    with pytest.raises(ValidationError):
        build_grid(1.0, 8)


def test_field_validation():
    g = build_grid(1.0, 16)
    with pytest.raises(ValidationError):
        Field(g, np.zeros(15))
    with pytest.raises(ValidationError):
        Field(g, np.full(16, np.nan))
    with pytest.raises(ValidationError):
        Field(g, np.zeros(16), time=-1.0)


def test_one_sided_width_validation():
    with pytest.raises(ValidationError):
        one_sided_coefficients(3, 3)


@pytest.mark.parametrize("order", [1, 2, 3, 4, 5, 6])
def test_one_sided_moment_conditions_exact(order):
    # the defining moment conditions hold exactly in rational arithmetic,
    # so the rounded floats satisfy them to machine precision
    width = order + 2
    c = one_sided_coefficients(order, width)
    j = np.arange(width, dtype=float)
    for p in range(width):
        target = float(math.factorial(order)) if p == order else 0.0
        assert c @ j**p == pytest.approx(target, abs=1e-9 * np.sum(np.abs(c)))


def test_known_first_derivative_stencil():
    # the classic [-3/2, 2, -1/2] forward stencil
    c = one_sided_coefficients(1, 3)
    assert np.allclose(c, [-1.5, 2.0, -0.5])


def test_known_second_derivative_stencil():
    c = one_sided_coefficients(2, 4)
    assert np.allclose(c, [2.0, -5.0, 4.0, -1.0])


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_interior_convergence_order(order):
    # observed order of each operator within +-0.3 of 2 on a smooth function
    errs = []
    for n in (201, 401):
        g = build_grid(4.0, n)
        fld = Field(g, np.sin(g.x))
        exact = np.sin(g.x + order * np.pi / 2.0)
        approx = apply_derivative(fld, order)
        errs.append(np.max(np.abs(approx - exact)))
    observed = np.log2(errs[0] / errs[1])
    assert abs(observed - 2.0) <= 0.3


@pytest.mark.parametrize("order", [2, 3, 4, 5])
def test_boundary_derivative_convergence(order):
    errs = []
    for n in (201, 401):
        g = build_grid(4.0, n)
        fld = Field(g, np.exp(-g.x))
        errs.append(abs(boundary_derivative(fld, order) - (-1.0) ** order))
    observed = np.log2(errs[0] / errs[1])
    assert abs(observed - 2.0) <= 0.3


def test_apply_derivative_bad_order():
    g = build_grid(1.0, 32)
    fld = Field(g, np.zeros(32))
    with pytest.raises(ValidationError):
        apply_derivative(fld, 5)
    with pytest.raises(ValidationError):
        boundary_derivative(fld, 1)


def test_l2_norm_sq_zero_and_constant():
    g = build_grid(10.0, 101)
    assert l2_norm_sq(np.zeros(101), g) == 0.0
    assert l2_norm_sq(np.ones(101), g) == pytest.approx(10.0, rel=1e-14)


def test_l2_norm_sq_exponential():
    # int_0^inf e^{-2x} dx = 1/2; the [0, 40] truncation error is ~ e^{-80}
    # and the composite trapezoid error is dx^2/12 * [d(e^{-2x})/dx]_0^L
    g = build_grid(40.0, 4001)
    quad_err = g.dx**2 / 12.0 * 2.0
    assert l2_norm_sq(np.exp(-g.x), g) == pytest.approx(0.5, abs=1.1 * quad_err)
    assert l2_norm_sq(np.exp(-g.x), g) != pytest.approx(0.5, abs=1e-7)


def test_l2_norm_sq_length_mismatch():
    g = build_grid(1.0, 32)
    with pytest.raises(ValidationError):
        l2_norm_sq(np.zeros(31), g)


@given(
    coeffs=st.lists(
        st.floats(min_value=-3.0, max_value=3.0), min_size=1, max_size=5
    ),
    order=st.integers(min_value=1, max_value=4),
)
@settings(max_examples=50, deadline=None)
def test_stencil_exact_on_polynomials(coeffs, order):
    # degree <= accuracy + order - 1 polynomials are differentiated exactly
    g = build_grid(2.0, 32)
    poly = np.polynomial.Polynomial(coeffs)
    deg = len(coeffs) - 1
    if deg > order + 1:
        return
    fld = Field(g, poly(g.x))
    exact = poly.deriv(order)(g.x)
    approx = apply_derivative(fld, order)
    scale = max(1.0, np.max(np.abs(fld.values))) / g.dx**order
    assert np.max(np.abs(approx - exact)) <= 1e-10 * scale


@given(
    vals=st.lists(
        st.floats(min_value=-10.0, max_value=10.0), min_size=16, max_size=40
    )
)
@settings(max_examples=50, deadline=None)
def test_trapezoid_exact_piecewise_linear(vals):
    # agreement with the closed-form per-interval trapezoid sum
    v = np.array(vals)
    g = build_grid(1.0, len(v))
    dx = g.dx
    exact = np.sum(0.5 * dx * (v[:-1] ** 2 + v[1:] ** 2))
    assert l2_norm_sq(v, g) == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_stencil_set_accuracy():
    st_set = StencilSet()
    assert st_set.accuracy == 2
    assert set(st_set.central) == {1, 2, 3, 4}
    assert set(st_set.one_sided) == {1, 2, 3, 4, 5}
    for k, c in st_set.one_sided.items():
        assert len(c) == k + 2
