"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 257,1025,4097] [--repeat 20]

Also checks that both backends return the same numbers.
"""

import argparse
import time

import numpy as np

from henonlab import _kernels
from henonlab.radial import reference_spec, symmetric_grid
from henonlab.picard import SolverOptions, solve_minimal


def best_of(fn, repeat):
    fn()  # warm up (and compile)
    ts = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t)
    return min(ts)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="257,1025,4097")
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    nb = _kernels.get_backend("numba")
    npb = _kernels.get_backend("numpy")
    print(f"{'kernel':<18}{'n':>7}{'numpy ms':>12}{'numba ms':>12}{'speedup':>9}{'max rel diff':>14}")
    for n in [int(s) for s in args.sizes.split(",")]:
        r = symmetric_grid(1e4, n).nodes
        f = 1.0 / (1.0 + r * r) ** 2
        x = np.geomspace(r[0], r[-1], 3 * n)
        lo = np.ldexp(1.0, np.arange(-12, 13)) / 2
        hi = 2 * lo
        cases = {
            "potential_nodes": lambda be: be.potential_nodes(r, f, 3.0, 0.0, -4.0, True, True),
            "evaluate": lambda be: be.evaluate(r, f, 0.0, -4.0, x),
            "annulus_moments": lambda be: be.annulus_moments(r, f, 0.0, -4.0, lo, hi, 2.0),
        }
        for name, fn in cases.items():
            a, b = fn(npb), fn(nb)
            diff = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
            t_np = best_of(lambda: fn(npb), args.repeat)
            t_nb = best_of(lambda: fn(nb), args.repeat)
            print(f"{name:<18}{n:>7}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>9.1f}{diff:>14.2e}")

    # whole solve, switching the module-level backend
    spec = reference_spec()
    g = symmetric_grid(1e4, 1025)
    for be in (npb, nb):
        _kernels.backend = be
        solve_minimal(spec, 1.0, g, SolverOptions())
        t = time.perf_counter()
        rep = solve_minimal(spec, 6.0, g, SolverOptions())
        dt = time.perf_counter() - t
        print(f"solve_minimal kappa=6 n=1025 [{be.name}]: {rep.status.value} in {rep.iterations} its, {1e3 * dt:.1f} ms")


if __name__ == "__main__":
    main()
