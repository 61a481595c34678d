"""Backend selection for the pentadiagonal solve kernel.

The compiled Cython kernel is used when available; otherwise a SciPy
sparse-LU fallback provides the same factor-once / solve-many interface.
Set ``CONTACTLINE_FORCE_FALLBACK=1`` to force the fallback (used by the
backend benchmark and cross-checks).
"""

import os

import numpy as np

from ..errors import NumericalFailureError

__all__ = ["PentaSolver", "BACKEND", "available_backends"]

try:
    from . import _pentacore

    _HAVE_EXT = True
except ImportError:
    _pentacore = None
    _HAVE_EXT = False


class _CythonPentaSolver:
    """Factor a pentadiagonal matrix once, solve repeatedly."""

    backend = "cython"

    def __init__(self, l2, l1, d, u1, u2):
        self._l2 = np.array(l2, dtype=float)
        self._l1 = np.array(l1, dtype=float)
        self._d = np.array(d, dtype=float)
        self._u1 = np.array(u1, dtype=float)
        self._u2 = np.array(u2, dtype=float)
        try:
            _pentacore.factor(self._l2, self._l1, self._d, self._u1, self._u2)
        except ZeroDivisionError as exc:
            raise NumericalFailureError(str(exc)) from exc

    def solve(self, b):
        return _pentacore.solve(
            self._l2, self._l1, self._d, self._u1, self._u2,
            np.ascontiguousarray(b, dtype=float),
        )


class _SciPyPentaSolver:
    """Same interface backed by scipy.sparse.linalg.splu."""

    backend = "scipy"

    def __init__(self, l2, l1, d, u1, u2):
        from scipy.sparse import diags
        from scipy.sparse.linalg import splu

        n = len(d)
        mat = diags(
            [np.asarray(l2)[2:], np.asarray(l1)[1:], d,
             np.asarray(u1)[: n - 1], np.asarray(u2)[: n - 2]],
            offsets=[-2, -1, 0, 1, 2],
            format="csc",
        )
        try:
            self._lu = splu(mat)
        except RuntimeError as exc:
            raise NumericalFailureError(f"singular pentadiagonal matrix: {exc}") from exc

    def solve(self, b):
        return self._lu.solve(np.asarray(b, dtype=float))


def available_backends():
    names = ["scipy"]
    if _HAVE_EXT:
        names.insert(0, "cython")
    return names


if _HAVE_EXT and not os.environ.get("CONTACTLINE_FORCE_FALLBACK"):
    PentaSolver = _CythonPentaSolver
    BACKEND = "cython"
else:
    PentaSolver = _SciPyPentaSolver
    BACKEND = "scipy"


def make_solver(l2, l1, d, u1, u2, backend=None):
    """Construct a solver, optionally pinning the backend by name."""
    if backend is None:
        return PentaSolver(l2, l1, d, u1, u2)
    if backend == "cython":
        if not _HAVE_EXT:
            raise NumericalFailureError("compiled kernel not available")
        return _CythonPentaSolver(l2, l1, d, u1, u2)
    if backend == "scipy":
        return _SciPyPentaSolver(l2, l1, d, u1, u2)
    raise ValueError(f"unknown backend {backend!r}")
