"""Detection of incipient singularities in a trace and fitting of the
three candidate blow-up laws for the speed:

    LOG:     V(t) = C1*log(t0 - t) + C2
    SQRT:    beta^2(t) = a4*(t0 - t),  V(t) = sqrt(a4/(t0 - t))
    SELFSIM: V(t) = A*(t0 - t)^{-3/4}

All three are reported side by side; ranking never suppresses losers.
"""

from dataclasses import dataclass, field as dfield

import numpy as np

from .errors import ConstraintViolationError, ValidationError

__all__ = [
    "Window",
    "RateFit",
    "detect_window",
    "window_from_trace",
    "fit_log",
    "fit_sqrt",
    "fit_selfsim",
    "select_model",
    "golden_min",
]

MODELS = ("LOG", "SQRT", "SELFSIM")


@dataclass
class Window:
    start: int
    stop: int  # exclusive
    t_a: float
    t_b: float

    def __len__(self):
        return self.stop - self.start

    @property
    def empty(self):
        return self.stop <= self.start


@dataclass
class RateFit:
    model: str
    params: dict
    rms: float
    normalized_rms: float
    window: Window
    diagnostics: dict = dfield(default_factory=dict)

    @property
    def t0(self):
        return self.params["t0"]


def golden_min(f, lo, hi, tol=1e-10):
    """Golden-section minimization of a unimodal scalar function."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def detect_window(trace):
    """Trailing window where |V| has grown >= 10x and |beta| has decayed
    monotonically by >= 10x.  Empty window if no such regime exists."""
    if len(trace) < 50:
        raise ValidationError("need at least 50 trace records")
    t = trace["t"]
    V = np.abs(trace["V"])
    beta = np.abs(trace["beta"])
    n = len(t)
    # longest trailing run of non-increasing |beta|
    start = n - 1
    while start > 0 and beta[start - 1] >= beta[start] and np.isfinite(V[start - 1]):
        start -= 1
    if beta[n - 1] > 0 and beta[start] / beta[n - 1] >= 10.0 \
            and V[start] > 0 and V[n - 1] / V[start] >= 10.0:
        return Window(start, n, float(t[start]), float(t[n - 1]))
    return Window(n, n, float(t[n - 1]), float(t[n - 1]))


def window_from_trace(trace, start, stop):
    t = trace["t"]
    return Window(start, stop, float(t[start]), float(t[stop - 1]))


def _window_data(trace, window, column):
    if window.empty:
        raise ValidationError("empty fit window")
    if len(window) < 8:
        raise ValidationError("degenerate fit window (< 8 points)")
    sl = slice(window.start, window.stop)
    return trace["t"][sl], trace[column][sl]


def _t0_bracket(window):
    span = max(window.t_b - window.t_a, 1e-12)
    return window.t_b + 1e-9 * span, window.t_b + 10.0 * span


def _normalized(rms, values):
    scale = float(np.std(values))
    return rms / scale if scale > 0 else float("inf")


def fit_log(trace, window):
    """V = C1*log(t0-t) + C2; exact linear LSQ inside a golden-section
    search over t0."""
    t, V = _window_data(trace, window, "V")

    def inner(t0):
        X = np.column_stack([np.log(t0 - t), np.ones_like(t)])
        coef, _, _, _ = np.linalg.lstsq(X, V, rcond=None)
        r = V - X @ coef
        return float(np.sqrt(np.mean(r * r))), coef

    lo, hi = _t0_bracket(window)
    t0 = golden_min(lambda s: inner(s)[0], lo, hi)
    rms, (C1, C2) = inner(t0)
    return RateFit(
        "LOG",
        {"t0": float(t0), "C1": float(C1), "C2": float(C2)},
        rms,
        _normalized(rms, V),
        window,
    )


def fit_sqrt(trace, window):
    """beta^2 = a4*(t0-t): exact linear fit of beta^2 against t; rejects
    a4 <= 0.  Cross-validates sqrt(a4) against V*sqrt(t0-t)."""
    t, beta = _window_data(trace, window, "beta")
    V = trace["V"][window.start : window.stop]
    b2 = beta * beta
    X = np.column_stack([t, np.ones_like(t)])
    (slope, intercept), _, _, _ = np.linalg.lstsq(X, b2, rcond=None)
    a4 = -float(slope)
    if a4 <= 0:
        raise ConstraintViolationError(
            f"sqrt-law fit requires a4 > 0, got a4 = {a4:.3e}"
        )
    t0 = float(intercept) / a4
    rms_b2 = float(np.sqrt(np.mean((b2 - (a4 * (t0 - t))) ** 2)))
    if t0 <= window.t_b:
        raise ConstraintViolationError(
            f"sqrt-law fit places t0 = {t0:.6g} inside the window"
        )
    # V-space residual for cross-model ranking
    V_pred = np.sqrt(a4 / (t0 - t))
    rms_V = float(np.sqrt(np.mean((V - V_pred) ** 2)))
    sqrt_a4_from_V = float(np.mean(V * np.sqrt(t0 - t)))
    return RateFit(
        "SQRT",
        {"t0": t0, "a4": a4},
        rms_V,
        _normalized(rms_V, V),
        window,
        diagnostics={
            "rms_beta_sq": rms_b2,
            "sqrt_a4_from_beta": float(np.sqrt(a4)),
            "sqrt_a4_from_V": sqrt_a4_from_V,
        },
    )


def fit_selfsim(trace, window):
    """V = A*(t0-t)^{-3/4}; closed-form scalar LSQ for A inside a
    golden-section search over t0."""
    t, V = _window_data(trace, window, "V")

    def inner(t0):
        phi = (t0 - t) ** -0.75
        A = float(phi @ V / (phi @ phi))
        r = V - A * phi
        return float(np.sqrt(np.mean(r * r))), A

    lo, hi = _t0_bracket(window)
    t0 = golden_min(lambda s: inner(s)[0], lo, hi)
    rms, A = inner(t0)
    return RateFit(
        "SELFSIM", {"t0": float(t0), "A": A}, rms, _normalized(rms, V), window
    )


def select_model(fits):
    """Rank fits by normalized rms, best first.  All fits are returned."""
    fits = list(fits)
    if not fits:
        raise ValidationError("no fits to rank")
    return sorted(fits, key=lambda f: f.normalized_rms)
