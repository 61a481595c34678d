# cython: boundscheck=False, wraparound=False, cdivision=True
"""Pentadiagonal LU factorization and solve, no pivoting.

The step matrices are pentadiagonal (bandwidth 2 from the 5-point fourth
derivative stencil; boundary rows fit inside the band).  They are factored
once per run and solved against two right-hand sides per time step, so the
factor/solve split is the hot path.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def factor(double[::1] l2, double[::1] l1, double[::1] d,
           double[::1] u1, double[::1] u2):
    """In-place Doolittle LU of a pentadiagonal matrix given by its
    diagonals: l2[i]=A[i,i-2], l1[i]=A[i,i-1], d[i]=A[i,i],
    u1[i]=A[i,i+1], u2[i]=A[i,i+2]."""
    cdef Py_ssize_t i, n = d.shape[0]
    cdef double beta, alpha
    for i in range(n):
        beta = 0.0
        alpha = 0.0
        if i >= 2:
            beta = l2[i] / d[i - 2]
            l2[i] = beta
        if i >= 1:
            alpha = l1[i]
            if i >= 2:
                alpha = alpha - beta * u1[i - 2]
            alpha = alpha / d[i - 1]
            l1[i] = alpha
        if i >= 2:
            d[i] = d[i] - beta * u2[i - 2]
        if i >= 1:
            d[i] = d[i] - alpha * u1[i - 1]
            if i + 1 < n:
                u1[i] = u1[i] - alpha * u2[i - 1]
        if d[i] == 0.0:
            raise ZeroDivisionError("singular pentadiagonal matrix")


def solve(double[::1] l2, double[::1] l1, double[::1] d,
          double[::1] u1, double[::1] u2, double[::1] b):
    """Solve L U x = b for factors produced by :func:`factor`.
    Returns a new array; ``b`` is not modified."""
    cdef Py_ssize_t i, n = d.shape[0]
    out = np.empty(n)
    cdef double[::1] x = out
    x[0] = b[0]
    if n > 1:
        x[1] = b[1] - l1[1] * x[0]
    for i in range(2, n):
        x[i] = b[i] - l1[i] * x[i - 1] - l2[i] * x[i - 2]
    x[n - 1] = x[n - 1] / d[n - 1]
    if n > 1:
        x[n - 2] = (x[n - 2] - u1[n - 2] * x[n - 1]) / d[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (x[i] - u1[i] * x[i + 1] - u2[i] * x[i + 2]) / d[i]
    return out
