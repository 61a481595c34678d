"""Benchmark the pentadiagonal kernel backends.

Times (a) repeated solves against a factored system, which is the inner
loop of every time step, and (b) a full stepper run, for each available
backend.  Usage: python benchmarks/bench_solvers.py [--n 4001] [--steps 500]
"""

import argparse
import time

import numpy as np

from contactline.kernels import available_backends, make_solver
from contactline.stepper import ImexAffineStepper, initial_profile
from contactline.grid import build_grid


def bench_raw(n, repeats, backend):
    rng = np.random.default_rng(0)
    l2 = rng.standard_normal(n)
    l1 = rng.standard_normal(n)
    d = 10.0 + rng.random(n)
    u1 = rng.standard_normal(n)
    u2 = rng.standard_normal(n)
    b = rng.standard_normal(n)
    t0 = time.perf_counter()
    solver = make_solver(l2, l1, d, u1, u2, backend=backend)
    t_factor = time.perf_counter() - t0
    t0 = time.perf_counter()
    for _ in range(repeats):
        solver.solve(b)
    t_solve = (time.perf_counter() - t0) / repeats
    return t_factor, t_solve


def bench_stepper(n, steps, backend):
    grid = build_grid(40.0, n)
    stepper = ImexAffineStepper(grid, 1e-4, backend=backend)
    fld = initial_profile(-1.0, 0.3, grid)
    t0 = time.perf_counter()
    for _ in range(steps):
        fld = stepper.step(fld).field
    return (time.perf_counter() - t0) / steps


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=4001)
    ap.add_argument("--repeats", type=int, default=2000)
    ap.add_argument("--steps", type=int, default=500)
    args = ap.parse_args()

    print(f"system size n = {args.n}")
    print(f"{'backend':10s} {'factor [us]':>12s} {'solve [us]':>12s} "
          f"{'step [us]':>12s}")
    rows = {}
    for backend in available_backends():
        t_factor, t_solve = bench_raw(args.n, args.repeats, backend)
        t_step = bench_stepper(args.n, args.steps, backend)
        rows[backend] = t_solve
        print(f"{backend:10s} {t_factor * 1e6:12.1f} {t_solve * 1e6:12.2f} "
              f"{t_step * 1e6:12.1f}")
    if len(rows) == 2:
        a, b = rows.values()
        names = list(rows)
        print(f"solve speedup {names[0]} vs {names[1]}: {b / a:.2f}x")


if __name__ == "__main__":
    main()
