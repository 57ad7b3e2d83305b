#!/usr/bin/env python3
"""Compare the compiled kernels against the pure-numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeats 5]

Times the two hot loops at representative problem sizes: the pairwise
class-Gaussian edge matrix (K classes, D dims) and the neighbor-entropy
score (N images, D dims). Also cross-checks that both backends agree.
"""

import argparse
import time

import numpy as np

from vegascore._kernels import _pyref
from vegascore.bundle import l2_normalize

try:
    from vegascore._kernels import _native
except ImportError:
    _native = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def run_case(label, make_native, make_python, repeats):
    t_py, ref = timeit(make_python, repeats)
    if _native is None:
        print(f"{label:38s} python={t_py * 1e3:9.2f} ms  native=unavailable")
        return
    t_nat, ours = timeit(make_native, repeats)
    err = float(np.max(np.abs(np.asarray(ours) - np.asarray(ref))))
    speedup = t_py / t_nat if t_nat > 0 else float("inf")
    print(
        f"{label:38s} python={t_py * 1e3:9.2f} ms  native={t_nat * 1e3:9.2f} ms  "
        f"speedup={speedup:5.1f}x  max|diff|={err:.1e}"
    )


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)

    print(f"native extension: {'present' if _native else 'MISSING (fallback only)'}\n")

    for k, d in ((50, 256), (200, 512), (400, 1024)):
        means = rng.standard_normal((k, d))
        variances = rng.uniform(0.05, 2.0, size=(k, d))
        run_case(
            f"pairwise_gaussian_edges K={k:4d} D={d:5d}",
            lambda: _native.bhattacharyya_diag_matrix(means, variances),
            lambda: _pyref.bhattacharyya_diag_matrix(means, variances),
            args.repeats,
        )

    for n, d in ((500, 64), (2000, 128), (5000, 256)):
        feats = l2_normalize(rng.standard_normal((n, d)))
        run_case(
            f"neighbor_entropy       N={n:4d} D={d:5d}",
            lambda: _native.neighbor_entropy_mean(feats, 0.05),
            lambda: _pyref.neighbor_entropy_mean(feats, 0.05),
            args.repeats,
        )


if __name__ == "__main__":
    main()
