"""Compare the numba and numpy kernel backends.

Usage: python benchmarks/bench_kernels.py [--n 2000] [--q 2] [--repeats 20]

Times the four hot kernels on a random contiguous-block problem.  Note that
the numba matvec is a naive triple loop while the numpy path calls BLAS on
block submatrices, so numpy can win on the matvec for large N; the numba
path exists to keep the small denoiser kernels allocation-free and to make
the whole step competitive at moderate sizes.
"""

import argparse
import time

import numpy as np

from blockamp import kernels


def bench(fn, args, repeats):
    fn(*args)  # warm up (JIT compile for the numba variants)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=2000)
    parser.add_argument("--q", type=int, default=2)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    n, q = args.n, args.q
    a = rng.normal(size=(n, n))
    y = a + a.T
    v = rng.normal(size=n)
    starts = np.linspace(0, n, q + 1).astype(np.int64)
    w = rng.uniform(0.5, 2.0, size=(q, q))
    weights = (w + w.T) / 2
    r = rng.normal(scale=2.0, size=n)

    cases = [
        ("scaled_block_matvec", (y, v, starts, weights)),
        ("block_sums", (v, starts)),
        ("rademacher_denoise", (r, 0.8, 1.2)),
        ("sparse_rademacher_denoise", (r, 0.8, 1.2, 0.1)),
    ]
    print(f"n={n} q={q} repeats={args.repeats} (best of)")
    print(f"{'kernel':<28}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for name, call_args in cases:
        t_np = bench(getattr(kernels, f"_{name}_numpy"), call_args, args.repeats)
        if kernels._HAVE_NUMBA:
            t_nb = bench(getattr(kernels, f"_{name}_numba"), call_args, args.repeats)
            print(f"{name:<28}{t_np * 1e3:>10.3f}ms{t_nb * 1e3:>10.3f}ms{t_np / t_nb:>10.2f}")
        else:
            print(f"{name:<28}{t_np * 1e3:>10.3f}ms{'n/a':>12}{'n/a':>10}")


if __name__ == "__main__":
    main()
