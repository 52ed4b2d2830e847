"""Time the moment-accumulation kernels on both backends.

Runs the pairwise sign-product accumulator and the projected third-moment
accumulator on the same synthetic observation block under the numpy and
numba implementations, prints per-call times and the speedup, and checks
the outputs agree (exactly for the second moment, to accumulation order
for the third).

Usage: python benchmarks/bench_kernels.py [--count 20000] [--pairs 435]
"""

import argparse
import time

import numpy as np

from mixmnl.kernels import (
    HAVE_NUMBA,
    projected_third_moment_sums,
    sign_outer_products,
)


def make_observations(count, n_pairs, ell, rng):
    idx = np.empty((count, ell), dtype=np.int64)
    for t in range(count):
        idx[t] = rng.choice(n_pairs, size=ell, replace=False)
    signs = rng.choice([-1.0, 1.0], size=(count, ell))
    return idx, signs


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--count", type=int, default=20000, help="observations")
    parser.add_argument("--pairs", type=int, default=435, help="distinct pairs")
    parser.add_argument("--ell", type=int, default=16, help="pairs per observation")
    parser.add_argument("--rank", type=int, default=3, help="projection rank")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if not HAVE_NUMBA:
        print("numba is not importable; only the numpy backend will run")

    rng = np.random.default_rng(0)
    idx, signs = make_observations(args.count, args.pairs, args.ell, rng)
    basis = np.linalg.qr(rng.normal(size=(args.pairs, args.rank)))[0]

    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    results = {}
    for name in backends:
        # First call compiles under numba; time warm calls only.
        s2 = sign_outer_products(idx, signs, args.pairs, backend=name)
        s3 = projected_third_moment_sums(idx, signs, basis, backend=name)
        t2 = best_of(
            lambda: sign_outer_products(idx, signs, args.pairs, backend=name),
            args.repeats,
        )
        t3 = best_of(
            lambda: projected_third_moment_sums(idx, signs, basis, backend=name),
            args.repeats,
        )
        results[name] = (t2, t3, s2, s3)

    print(f"count={args.count} pairs={args.pairs} ell={args.ell} rank={args.rank}")
    print(f"{'kernel':<24} " + " ".join(f"{b:>12}" for b in backends) + "   speedup")
    for label, slot in (("sign_outer_products", 0), ("projected_third", 1)):
        row = [results[b][slot] for b in backends]
        cells = " ".join(f"{1000.0 * t:>10.2f}ms" for t in row)
        speed = f"{row[0] / row[-1]:>8.1f}x" if len(row) > 1 else "       -"
        print(f"{label:<24} {cells} {speed}")

    if len(backends) > 1:
        d2 = np.abs(results["numpy"][2] - results["numba"][2]).max()
        d3 = np.abs(results["numpy"][3] - results["numba"][3]).max()
        print(f"max |S2 difference| = {d2:.1e} (exact integer sums, expect 0)")
        print(f"max |S3 difference| = {d3:.1e} (summation order only)")
        assert d2 == 0.0
        assert d3 < 1e-9 * max(1.0, np.abs(results["numpy"][3]).max())


if __name__ == "__main__":
    main()
