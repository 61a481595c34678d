"""Uniform grid, finite-difference stencils, and quadrature.

All derivative operators are second-order accurate: central stencils in the
interior, minimal-width one-sided stencils near the boundaries.  One-sided
coefficients are generated exactly in rational arithmetic so that stencil
exactness on polynomials holds to rounding.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import numpy as np

from .errors import ValidationError

__all__ = [
    "Grid",
    "Field",
    "StencilSet",
    "build_grid",
    "apply_derivative",
    "boundary_derivative",
    "l2_norm_sq",
    "one_sided_coefficients",
]


def one_sided_coefficients(order, width):
    """Forward-difference coefficients for the ``order``-th derivative at
    node 0 using nodes ``0..width-1`` of a unit-spacing grid.

    Solved exactly over the rationals (moment conditions), so the returned
    floats are correctly rounded.  Accuracy is ``width - order``.
    """
    if width <= order:
        raise ValidationError(f"width {width} too small for derivative order {order}")
    m = width
    # rows: moment conditions sum_j c_j j^p = order! * delta(p, order)
    a = [[Fraction(j) ** p for j in range(m)] for p in range(m)]
    b = [Fraction(0)] * m
    b[order] = Fraction(factorial(order))
    # exact Gaussian elimination with partial (nonzero) pivoting
    for col in range(m):
        piv = next(r for r in range(col, m) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        b[col], b[piv] = b[piv], b[col]
        inv = Fraction(1) / a[col][col]
        a[col] = [v * inv for v in a[col]]
        b[col] *= inv
        for r in range(m):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [vr - f * vc for vr, vc in zip(a[r], a[col])]
                b[r] -= f * b[col]
    return np.array([float(v) for v in b])


# interior central stencils (unit spacing), accuracy 2
_CENTRAL = {
    1: np.array([-0.5, 0.0, 0.5]),
    2: np.array([1.0, -2.0, 1.0]),
    3: np.array([-0.5, 1.0, 0.0, -1.0, 0.5]),
    4: np.array([1.0, -4.0, 6.0, -4.0, 1.0]),
}


@dataclass(frozen=True)
class Grid:
    """Uniform truncation of the half-line: nodes x_i = i*dx on [0, L]."""

    L: float
    n: int

    @property
    def dx(self):
        return self.L / (self.n - 1)

    @property
    def x(self):
        return np.linspace(0.0, self.L, self.n)

    def __post_init__(self):
        if self.L <= 0:
            raise ValidationError(f"domain length must be positive, got {self.L}")
        if self.n < 16:
            raise ValidationError(f"need at least 16 nodes, got {self.n}")


def build_grid(L, n):
    return Grid(float(L), int(n))


@dataclass
class Field:
    """Profile samples on a grid at one time instant."""

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ValidationError(
                f"field length {self.values.shape} does not match grid size {self.grid.n}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("field contains non-finite values")
        if self.time < 0:
            raise ValidationError("field time must be non-negative")


@dataclass
class StencilSet:
    """Central interior stencils (orders 1-4) and minimal-width accuracy-2
    one-sided stencils at the left boundary (orders 1-5), unit spacing."""

    central: dict = field(default_factory=lambda: dict(_CENTRAL))
    one_sided: dict = field(
        default_factory=lambda: {k: one_sided_coefficients(k, k + 2) for k in range(1, 6)}
    )
    accuracy: int = 2


_DEFAULT_STENCILS = StencilSet()


def apply_derivative(fld, order, stencils=None):
    """Pointwise k-th derivative of a field: central in the interior,
    one-sided of the same accuracy near both boundaries."""
    st = stencils or _DEFAULT_STENCILS
    if order not in st.central:
        raise ValidationError(f"derivative order must be 1-4, got {order}")
    v = fld.values
    dx = fld.grid.dx
    n = fld.grid.n
    cen = st.central[order]
    w = len(cen) // 2  # half-width
    one = st.one_sided[order]
    m = len(one)
    if n < m:
        raise ValidationError("field too short for the stencil width")
    out = np.empty(n)
    out[w : n - w] = np.convolve(v, cen[::-1], mode="valid")
    sign = (-1.0) ** order
    for i in range(w):
        out[i] = one @ v[i : i + m]
        out[n - 1 - i] = sign * (one @ v[n - 1 - i : n - 1 - i - m : -1])
    out /= dx**order
    return out


def boundary_derivative(fld, order, stencils=None):
    """One-sided approximation of the k-th derivative at x = 0, accuracy 2."""
    st = stencils or _DEFAULT_STENCILS
    if order not in (2, 3, 4, 5):
        raise ValidationError(f"boundary derivative order must be 2-5, got {order}")
    coeffs = st.one_sided[order]
    m = len(coeffs)
    if fld.grid.n < m:
        raise ValidationError("field too short for the one-sided stencil")
    return float(coeffs @ fld.values[:m]) / fld.grid.dx**order


def l2_norm_sq(values, grid):
    """Trapezoid-rule approximation of the squared L2 norm on [0, L]."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.n,):
        raise ValidationError(
            f"length {values.shape} does not match grid size {grid.n}"
        )
    return float(np.trapezoid(values * values, dx=grid.dx))
