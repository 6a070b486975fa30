"""Time the numba kernels against their numpy twins and report agreement.

    python3 benchmarks/bench_backends.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from orthofield import _kernels_numba as nb
from orthofield import _kernels_numpy as npk


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def cases():
    rng = np.random.default_rng(0)
    z = np.ascontiguousarray(rng.uniform(0.0, 200.0, 100_000))
    zt = np.ascontiguousarray(rng.uniform(0.0, 120.0, 40_000))
    pts = np.ascontiguousarray(rng.uniform(-3.0, 3.0, (2000, 2)))
    r = np.ascontiguousarray(np.linspace(0.01, 24.0, 512))
    w = np.full(512, r[1] - r[0])
    return {
        "jv_array nu=2.5, 1e5 args": lambda m: m.jv_array(2.5, z),
        "bessel_table 41 orders, 4e4 args": lambda m: m.bessel_table(0.0, 41, zt),
        "exp_cov_matrix 2000x2000": lambda m: m.exp_cov_matrix(pts, pts, 1.0, 1.0),
        "exp_cov_symmetric 2000x2000": lambda m: m.exp_cov_symmetric(pts, 1.0, 1.0),
        "hankel_matrix 512x512": lambda m: m.hankel_matrix(1.0, r, w, r),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    print(f"{'kernel':36s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speed-up':>9s} {'max |diff|':>11s}")
    for name, fn in cases().items():
        fn(nb)  # compile outside the timed region
        t_nb, a = best_of(lambda: fn(nb), args.repeat)
        t_np, b = best_of(lambda: fn(npk), args.repeat)
        diff = float(np.max(np.abs(a - b)))
        print(f"{name:36s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:9.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
