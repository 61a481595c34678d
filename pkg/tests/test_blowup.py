"""Blow-up window detection and the three candidate rate fitters."""

import numpy as np
import pytest

from contactline import blowup
from contactline.errors import ConstraintViolationError, ValidationError
from contactline.verify import synthetic_trace


def test_golden_min_quadratic():
    x = blowup.golden_min(lambda s: (s - 1.7) ** 2, 0.0, 5.0)
    assert x == pytest.approx(1.7, abs=1e-8)


def test_detect_window_requires_records():
    tr = synthetic_trace("SQRT", 1.0, {"a4": 3.0}, 0.1, 0.9, count=10)
    with pytest.raises(ValidationError):
        blowup.detect_window(tr)


def test_detect_window_on_blowup_trace():
    tr = synthetic_trace("SQRT", 1.0, {"a4": 3.0}, 0.1, 1.0 - 1e-4, count=200)
    win = blowup.detect_window(tr)
    assert not win.empty
    assert win.stop == len(tr)
    V = np.abs(tr["V"])
    assert V[len(tr) - 1] / V[win.start] >= 10.0


def test_detect_window_flat_trace_empty():
    tr = synthetic_trace("SQRT", 10.0, {"a4": 3.0}, 0.0, 0.5, count=60)
    win = blowup.detect_window(tr)
    assert win.empty


def test_fit_requires_enough_points():
    tr = synthetic_trace("LOG", 1.0, {"C1": 2.0, "C2": 1.0}, 0.2, 0.9, count=60)
    win = blowup.window_from_trace(tr, 0, 4)
    with pytest.raises(ValidationError):
        blowup.fit_log(tr, win)


@pytest.mark.parametrize(
    "model,params,fitter",
    [
        ("LOG", {"C1": 2.0, "C2": 1.0}, blowup.fit_log),
        ("SQRT", {"a4": 3.0}, blowup.fit_sqrt),
        ("SELFSIM", {"A": 5.0}, blowup.fit_selfsim),
    ],
)
def test_noiseless_recovery(model, params, fitter):
    t0 = 1.5
    tr = synthetic_trace(model, t0, dict(params, t0=t0), t0 - 0.5, t0 - 0.01,
                         count=200)
    win = blowup.window_from_trace(tr, 0, len(tr))
    fit = fitter(tr, win)
    assert fit.model == model
    assert fit.t0 == pytest.approx(t0, abs=1e-6)
    for k, v in params.items():
        assert fit.params[k] == pytest.approx(v, rel=1e-6)


def test_sqrt_rejects_wrong_sign():
    # beta^2 growing in t implies a4 < 0; the fit must refuse it
    count = 100
    t = np.linspace(0.1, 0.9, count)
    tr = synthetic_trace("SQRT", 1.0, {"a4": 3.0}, 0.1, 0.9, count=count)
    tr.data["beta"] = -np.sqrt(3.0 * t)  # reversed decay
    win = blowup.window_from_trace(tr, 0, count)
    with pytest.raises(ConstraintViolationError):
        blowup.fit_sqrt(tr, win)


def test_sqrt_cross_validation_diagnostics():
    t0 = 1.0
    tr = synthetic_trace("SQRT", t0, {"a4": 3.0}, 0.3, 0.95, count=150)
    win = blowup.window_from_trace(tr, 0, len(tr))
    fit = blowup.fit_sqrt(tr, win)
    d = fit.diagnostics
    assert d["sqrt_a4_from_beta"] == pytest.approx(np.sqrt(3.0), rel=1e-8)
    assert d["sqrt_a4_from_V"] == pytest.approx(np.sqrt(3.0), rel=1e-8)


def test_select_model_ranks_generator_first():
    for model, params, in (
        ("LOG", {"t0": 1.0, "C1": 2.0, "C2": 1.0}),
        ("SQRT", {"t0": 1.0, "a4": 3.0}),
        ("SELFSIM", {"t0": 2.0, "A": 5.0}),
    ):
        t0 = params["t0"]
        tr = synthetic_trace(model, t0, params, t0 - 1.0, t0 - 0.1, count=200)
        win = blowup.window_from_trace(tr, 0, len(tr))
        fits = []
        for fitter in (blowup.fit_log, blowup.fit_sqrt, blowup.fit_selfsim):
            try:
                fits.append(fitter(tr, win))
            except ConstraintViolationError:
                pass
        ranked = blowup.select_model(fits)
        assert ranked[0].model == model
        # losers stay in the report
        assert len(ranked) == len(fits)


def test_select_model_empty():
    with pytest.raises(ValidationError):
        blowup.select_model([])


def test_noise_robustness_single_seed():
    rng = np.random.default_rng(3)
    t0 = 1.0
    tr = synthetic_trace("LOG", t0, {"C1": 2.0, "C2": 1.0}, 0.0, 0.95,
                         count=200, rng=rng, noise=0.01)
    win = blowup.window_from_trace(tr, 0, len(tr))
    fit = blowup.fit_log(tr, win)
    assert abs(fit.t0 - t0) <= 5e-3
