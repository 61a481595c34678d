"""Command-line interface: simulate, selfsimilar, fit, verify.

Exit codes: 0 success, 1 validation/parse error, 2 numerical failure,
3 verification failure.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import blowup, diagnostics, io, selfsimilar
from .errors import ContactLineError, ValidationError, VerificationFailureError
from .stepper import RunConfig, evolve


def _load_config(path):
    if path is None:
        return RunConfig()
    return io.parse_config(Path(path).read_text())


def _run_fits(trace, models, window=None):
    fits = []
    failures = {}
    if window is None:
        window = blowup.detect_window(trace) if len(trace) >= 50 else None
    if window is None or window.empty:
        return fits, failures, window
    fitters = {"log": blowup.fit_log, "sqrt": blowup.fit_sqrt,
               "selfsim": blowup.fit_selfsim}
    for name in models:
        try:
            fits.append(fitters[name](trace, window))
        except ContactLineError as exc:
            failures[name] = str(exc)
    return blowup.select_model(fits) if fits else fits, failures, window


def _fit_table(fits, failures):
    rows = []
    for f in fits:
        rows.append({"model": f.model, "params": f.params, "rms": f.rms,
                     "normalized_rms": f.normalized_rms,
                     "window": [f.window.t_a, f.window.t_b],
                     "diagnostics": f.diagnostics})
    for name, msg in failures.items():
        rows.append({"model": name.upper(), "error": msg})
    return rows


def cmd_simulate(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = _load_config(args.config)
    levels = 1 + max(0, args.resolution_sweep)
    traces = []
    summaries = []
    for level in range(levels):
        n = (config.n - 1) * 2**level + 1
        cfg = RunConfig(**{**_config_dict(config), "n": n})
        started = time.perf_counter()
        trace, snapshots = evolve(cfg)
        elapsed = time.perf_counter() - started
        suffix = "" if level == 0 else f"_r{level}"
        trace_path = out / f"trace{suffix}.csv"
        io.write_trace(trace, trace_path)
        for snap in snapshots:
            io.write_columns(
                out / f"snapshot{suffix}_t{snap.time:.6f}.dat",
                ("x", "h"), (snap.grid.x, snap.values),
            )
        traces.append(trace)
        flux = -0.5 if cfg.third_bc == "flux" else cfg.gamma0 * trace["V"]
        balances = {
            ident: diagnostics.energy_balance(trace, ident, flux_value=flux).max_residual
            for ident in ("h-energy", "u-energy", "ux-energy",
                          "pointwise-1", "pointwise-2")
        }
        fits, failures, window = _run_fits(trace, ("log", "sqrt", "selfsim"))
        existence = diagnostics.existence_bound_check(trace)
        summaries.append({
            "config": json.loads(io.emit_config(cfg)),
            "halt_reason": trace.halt_reason,
            "final": {"t": trace["t"][-1], "V": trace["V"][-1],
                      "beta": trace["beta"][-1]},
            "steps": len(trace) - 1,
            "wall_clock_seconds": elapsed,
            "balance_max_residuals": balances,
            "rate_fits": _fit_table(fits, failures),
            "fit_window": None if window is None or window.empty
            else [window.t_a, window.t_b],
            "existence": existence,
            "nonphysical_time": trace.first_nonphysical_time(cfg.beta_threshold),
            "files": {"trace": str(trace_path)},
        })
    summary = summaries[0] if levels == 1 else {"levels": summaries}
    if levels > 1:
        summary["order_table"] = _order_table(traces)
    io.write_summary(out / "summary.json", summary)
    print(f"wrote {out / 'summary.json'} (halt: {traces[0].halt_reason})")
    return 0


def _config_dict(config):
    import dataclasses

    return dataclasses.asdict(config)


def _order_table(traces):
    table = []
    for ident in ("h-energy", "u-energy", "ux-energy"):
        maxima = [diagnostics.energy_balance(t, ident).max_residual for t in traces]
        orders = [float(np.log2(maxima[i] / maxima[i + 1]))
                  for i in range(len(maxima) - 1)]
        table.append({"identity": ident, "max_residuals": maxima,
                      "observed_orders": orders})
    return table


def cmd_selfsimilar(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    profile = selfsimilar.build_profile(
        z_max=args.z_max, z_min=args.z_min, dz=args.dz, method=args.method,
        t0=args.t0, normalization_mode=args.normalization,
    )
    io.write_columns(out / "profile_G.dat", ("z", "G", "G1", "G2"),
                     (profile.z_grid, profile.G, profile.G1, profile.G2))
    io.write_columns(out / "profile_f.dat", ("xi", "f"),
                     (profile.xi, profile.f))
    constants = {
        "z0": profile.z0, "G1_at_z0": profile.G1_at_z0,
        "G2_at_z0": profile.G2_at_z0, "C": profile.C,
        "t0": profile.t0, "V0": profile.V0, "gamma0": profile.gamma0,
        "beta_coefficient": profile.beta_coefficient,
        "normalization_mode": profile.normalization_mode,
        "certified": True,
    }
    if args.dz_sweep > 0:
        rows = []
        z_prev = None
        for k in range(args.dz_sweep + 1):
            dz = args.dz / 2**k
            p = selfsimilar.build_profile(z_max=args.z_max, z_min=args.z_min,
                                          dz=dz, method=args.method)
            rows.append({"dz": dz, "z0": p.z0,
                         "shift": None if z_prev is None else abs(p.z0 - z_prev)})
            z_prev = p.z0
        constants["richardson_table"] = rows
    io.write_summary(out / "selfsimilar_summary.json", constants)
    print(f"z0 = {profile.z0:.8f}, V0 = {profile.V0:.8f}, "
          f"gamma0 = {profile.gamma0:.8f} -> {out}")
    return 0


def cmd_fit(args):
    trace = io.read_trace(args.trace)
    models = [m.strip() for m in args.models.split(",") if m.strip()]
    bad = [m for m in models if m not in ("log", "sqrt", "selfsim")]
    if bad:
        raise ValidationError(f"unknown model(s): {', '.join(bad)}")
    window = None
    if args.window is not None:
        t = trace["t"]
        t_a, t_b = args.window
        idx = np.nonzero((t >= t_a) & (t <= t_b))[0]
        if idx.size < 2:
            raise ValidationError("fit window contains fewer than 2 records")
        window = blowup.window_from_trace(trace, int(idx[0]), int(idx[-1]) + 1)
    fits, failures, window = _run_fits(trace, models, window)
    report = {"trace": args.trace, "rate_fits": _fit_table(fits, failures),
              "window": None if window is None or window.empty
              else [window.t_a, window.t_b]}
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        io.write_summary(Path(args.out) / "fit_summary.json", report)
    if not fits and window is not None and window.empty:
        print("no blow-up window detected")
    for f in fits:
        print(f"{f.model:8s} rms={f.rms:.6e} nrms={f.normalized_rms:.6e} "
              f"params={f.params}")
    for name, msg in failures.items():
        print(f"{name.upper():8s} rejected: {msg}")
    return 0


def cmd_verify(args):
    from . import verify

    results = verify.run_checks()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        io.write_summary(out / "verify_report.json", results)
    failed = [r["name"] for r in results if not r["passed"]]
    if failed:
        raise VerificationFailureError(f"failed checks: {', '.join(failed)}")
    print("all checks passed")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="contactline",
        description="Contact-line singularity simulator and verification suite",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a configured evolution")
    p.add_argument("--config", default=None, help="JSON config path")
    p.add_argument("--out", default="runs/latest", help="output directory")
    p.add_argument("--resolution-sweep", type=int, default=0, metavar="K",
                   help="additional dx-halved runs with an order table")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("selfsimilar", help="build the self-similar profile")
    p.add_argument("--z-max", type=float, default=20.0)
    p.add_argument("--z-min", type=float, default=-15.0)
    p.add_argument("--dz", type=float, default=1e-3)
    p.add_argument("--method", choices=("heun", "rk4"), default="heun")
    p.add_argument("--t0", type=float, default=1.0)
    p.add_argument("--normalization",
                   choices=("flux-sign", "far-field-decay"),
                   default="far-field-decay")
    p.add_argument("--dz-sweep", type=int, default=0, metavar="K")
    p.add_argument("--out", default="runs/selfsimilar")
    p.set_defaults(func=cmd_selfsimilar)

    p = sub.add_parser("fit", help="fit blow-up laws to a trace file")
    p.add_argument("trace", help="trace CSV path")
    p.add_argument("--models", default="log,sqrt,selfsim")
    p.add_argument("--window", type=float, nargs=2, metavar=("TA", "TB"),
                   default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ContactLineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
