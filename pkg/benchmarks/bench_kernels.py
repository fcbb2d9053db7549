"""Time the compiled kernel core against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Both backends are imported directly, so the comparison does not depend on
RADARCAP_PURE_PYTHON.
"""

import argparse
import timeit

import numpy as np

from radarcap import _kernels_py

try:
    from radarcap import _kernels as _compiled
except ImportError:
    _compiled = None


def cases(rng):
    z = rng.uniform(0.0, 2000.0, 200_000)
    x = np.linspace(0.0, 50.0, 40)
    y = np.linspace(1e-3, 150.0, 2000)
    v = rng.normal(size=12)
    locs = np.sort(rng.uniform(0.0, 40.0, 12))
    locs[0] = 0.0
    return {
        "log_i0 (200k)": lambda m: m.log_i0(z),
        "log_kernel_matrix 40x2000, 64 nodes": lambda m: m.log_kernel_matrix(x, y, 25.0, 64, False),
        "log_kernel_matrix alt form": lambda m: m.log_kernel_matrix(x, y, 25.0, 64, True),
        "project_power_simplex (12)": lambda m: m.project_power_simplex(v, locs, 5.0),
    }


def best_time(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'case':40s} {'numpy':>12s} {'cython':>12s} {'speedup':>8s}")
    for name, call in cases(rng).items():
        t_py = best_time(lambda: call(_kernels_py), args.repeat)
        if _compiled is None:
            print(f"{name:40s} {t_py * 1e3:10.3f}ms {'n/a':>12s}")
            continue
        t_c = best_time(lambda: call(_compiled), args.repeat)
        print(f"{name:40s} {t_py * 1e3:10.3f}ms {t_c * 1e3:10.3f}ms {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()
