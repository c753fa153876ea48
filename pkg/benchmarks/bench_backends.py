"""Benchmark the numba kernels against the pure-numpy fallback.

Times the batched recovery kernel and full right-hand-side evaluations on
representative workloads, plus a short Sod time march through the solver.
JIT compilation is excluded by a warmup call per kernel.

Run from the repository root:

    python3 benchmarks/bench_backends.py
"""

from __future__ import annotations

import time

import numpy as np

from enosv.cases import case_sod, initial_subcell_averages
from enosv.discretization import Grid, recovery_tables
from enosv.kernels import numba_backend, numpy_backend
from enosv.solver import SolverConfig, compute_dt, make_state, ssprk33_step

GAMMA = 1.4
BACKENDS = (numba_backend, numpy_backend)


def timeit(fn, repeats):
    fn()  # warmup (includes JIT compilation for the numba backend)
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def bench_recover_batch(rows):
    rng = np.random.default_rng(0)
    print(f"\nrecover_batch: {rows} macrocells, 8 subcells, k=7, l=1")
    tables = recovery_tables(8, 7)
    averages = rng.standard_normal((rows, 8))
    times = {}
    for backend in BACKENDS:
        times[backend.NAME] = timeit(
            lambda b=backend: b.recover_batch(averages, tables, 7, 1), 20
        )
        per_cell = times[backend.NAME] / rows * 1e6
        print(f"  {backend.NAME:>6}: {times[backend.NAME] * 1e3:8.3f} ms "
              f"({per_cell:6.2f} us per macrocell)")
    print(f"  speedup: {times['numpy'] / times['numba']:.1f}x")


def bench_euler_rhs(n_macro, subcells, k):
    case = case_sod()
    grid = Grid.uniform(*case.domain, n_macro, subcells)
    averages = initial_subcell_averages(case, grid, GAMMA)
    tables = recovery_tables(subcells, k)
    ext = np.concatenate([averages[:1], averages, averages[-1:]], axis=0)
    print(f"\neuler_rhs: Sod averages, {n_macro} macrocells x {subcells} "
          f"subcells, k={k}, l=1")
    times = {}
    for backend in BACKENDS:
        times[backend.NAME] = timeit(
            lambda b=backend: b.euler_rhs(ext, grid.subcell_widths, tables,
                                          k, 1, GAMMA), 50
        )
        print(f"  {backend.NAME:>6}: {times[backend.NAME] * 1e3:8.3f} ms")
    print(f"  speedup: {times['numpy'] / times['numba']:.1f}x")


def bench_sod_march(steps):
    case = case_sod()
    grid = Grid.uniform(*case.domain, 25, 4)
    print(f"\nssprk33 march: Sod, 25 macrocells x 4 subcells, {steps} steps")
    times = {}
    for name in ("numba", "numpy"):
        averages = initial_subcell_averages(case, grid, GAMMA)
        state = make_state(grid, averages,
                           SolverConfig(k=3, l=1, boundary="transmissive"),
                           backend=name)
        state = ssprk33_step(state, compute_dt(state))  # warmup
        start = time.perf_counter()
        for _ in range(steps):
            state = ssprk33_step(state, compute_dt(state))
        times[name] = time.perf_counter() - start
        print(f"  {name:>6}: {times[name]:8.3f} s "
              f"({times[name] / steps * 1e3:6.2f} ms per step)")
    print(f"  speedup: {times['numpy'] / times['numba']:.1f}x")


def main():
    print("kernel backend comparison (numba vs pure numpy)")
    bench_recover_batch(500)
    bench_euler_rhs(100, 4, 3)
    bench_euler_rhs(50, 8, 7)
    bench_sod_march(200)


if __name__ == "__main__":
    main()
