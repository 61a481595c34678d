"""Manufactured-solution machinery for convergence verification.

The reference field is the compatible initial profile with a linear-in-time
amplitude; the speed is prescribed, and the induced source makes the pair
an exact solution of the forced problem.  Boundary targets (contact value
and third derivative) follow from the reference field.
"""

import numpy as np
import sympy as sp

__all__ = ["ManufacturedSolution"]


class ManufacturedSolution:
    def __init__(self, beta0=-1.0, sigma=0.3, speed="2 + cos(4*t)"):
        x, t = sp.symbols("x t")
        V = sp.sympify(speed)
        h = (1 + sp.Rational(1, 2) * beta0 * x**2 - x**3 / 12) \
            * sp.exp(-((sigma * x) ** 4)) * (1 + t / 4)
        source = sp.diff(h, t) + sp.diff(h, x, 4) - V * sp.diff(h, x)
        self.h = sp.lambdify((x, t), h, "numpy")
        self.source = sp.lambdify((x, t), source, "numpy")
        self.speed = sp.lambdify(t, V, "numpy")
        self.bc_value = sp.lambdify(t, h.subs(x, 0), "numpy")
        self.third_target = sp.lambdify(t, sp.diff(h, x, 3).subs(x, 0), "numpy")

    def field_error(self, fld):
        """L-infinity error of a computed field against the reference."""
        return float(np.max(np.abs(fld.values - self.h(fld.grid.x, fld.time))))
