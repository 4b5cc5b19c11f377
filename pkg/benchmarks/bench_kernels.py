"""Time the compiled kernels against their numpy versions.

    python benchmarks/bench_kernels.py [--repeat 5] [--size 400]

The first compiled call (JIT warm-up, or cache load) is excluded.  Also
times a full L1 grid solve with each backend via HPSTM_DISABLE_NUMBA.
"""

import argparse
import os
import time

import numpy as np

from hpstm import _kernels as kn


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def kernel_cases(size, rng):
    levels = rng.normal(size=(size + 1, size))
    b = kn.l1_weights(size, 0.7)
    lower, upper = rng.uniform(-1, 0, size), rng.uniform(-1, 0, size)
    diag, rhs = 2.5 + rng.uniform(0, 1, size), rng.normal(size=size)
    xs = np.linspace(0.0, 3.0, size)

    def history(table):
        return lambda: [table["l1_history"](levels, b, k) for k in range(size)]

    def thomas(table):
        return lambda: [table["thomas"](lower, diag, upper, rhs) for _ in range(200)]

    def gauss(table):
        return lambda: table["gaussian"](xs, xs, 0.1)

    return {"l1_history (all steps)": history, "thomas x200": thomas, "gaussian matrices": gauss}


def grid_solve(disable, size):
    from hpstm.comparators import fdm_l1_solve
    from hpstm.problems import load_problem

    if disable:
        os.environ[kn.DISABLE_ENV] = "1"
    else:
        os.environ.pop(kn.DISABLE_ENV, None)
    p = load_problem("example3").with_alpha(0.8)
    return lambda: fdm_l1_solve(p, size, size, T=0.5)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--size", type=int, default=400)
    args = parser.parse_args()
    if kn.NUMBA is None:
        print("numba is not installed; nothing to compare (pip install numba)")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':<26}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, make in kernel_cases(args.size, rng).items():
        make(kn.NUMBA)()  # warm-up
        t_np = best_of(make(kn.NUMPY), args.repeat)
        t_nb = best_of(make(kn.NUMBA), args.repeat)
        print(f"{name:<26}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}{t_np / t_nb:>10.1f}")

    grid_solve(False, 20)()  # warm-up
    t_np = best_of(grid_solve(True, args.size), max(1, args.repeat // 2))
    t_nb = best_of(grid_solve(False, args.size), max(1, args.repeat // 2))
    label = f"fdm_l1_solve {args.size}x{args.size}"
    print(f"{label:<26}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
