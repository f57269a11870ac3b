"""Compare the numba and numpy kernel backends.

    python benchmarks/bench_backends.py [--repeat 3]

Each kernel runs on identical inputs under both backends; the first numba
call (JIT compilation or cache load) is excluded from the timings.
"""
import argparse
import time

import numpy as np

from selfaffine.kernels import backend_module
from selfaffine.kernels._dd import dd_recip


def cases(rng):
    digits = np.array([[0.0, 0.0], [1.0, 1.0]])
    probs = np.array([0.5, 0.5])
    r_hi, r_lo = dd_recip(np.array([2.0, 3.0]))
    x = rng.uniform(-1e6, 1e6, (4000, 2))
    terms = np.full(4000, 45, dtype=np.int64)
    pts = rng.random((1_000_000, 2))
    xis = rng.uniform(-50, 50, (20, 2))
    idx = rng.integers(0, 2, (200_000, 60))
    powers = np.ascontiguousarray((1 / np.array([1.618, 2.0]))[None, :] ** np.arange(60)[:, None])
    etas = np.column_stack([rng.uniform(-1, 1, 20_000), rng.uniform(1, 2, 20_000)])
    return {
        "geometric_product": lambda m: m.geometric_product(r_hi, r_lo, digits, probs, x, np.zeros_like(x), terms),
        "empirical_cf": lambda m: m.empirical_cf(pts, xis, 1 << 14),
        "series_points": lambda m: m.series_points(idx, digits, powers),
        "good_counts": lambda m: m.good_counts(np.array([1.8, 2.3]), etas, 20, 0.05),
        "max_good_count_1d": lambda m: [m.max_good_count_1d(float(t), 14, 0.05, 1.0, 2.0)
                                        for t in np.linspace(1.5, 2.0, 200)],
    }


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    np_mod, nb_mod = backend_module("numpy"), backend_module("numba")
    print(f"{'kernel':<20}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}")
    for name, run in cases(rng).items():
        run(nb_mod)  # compile
        t_np = best_of(lambda: run(np_mod), args.repeat)
        t_nb = best_of(lambda: run(nb_mod), args.repeat)
        print(f"{name:<20}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
