#!/usr/bin/env python3
"""Benchmark the compiled coordinate-descent kernel against the numpy fallback.

The workload is the shape the simulation campaigns hammer: warm-started
lambda-path fits on a 200-row hierarchically standardized second-order
design (65 columns), plus one dense cold fit near the path bottom.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from hereditas import kernels
from hereditas.selectors import LassoOptions, fit_lasso_path, lasso_fit
from hereditas.simulate import generate_replicate, preset
from hereditas.standardize import fit_location_scale, standardize_hierarchical
from hereditas.terms import canonical_terms


def build_problem():
    cfg = preset("setting1")
    data = generate_replicate(cfg, 0)
    terms = canonical_terms(cfg.p)
    ls = fit_location_scale(data.train.design)
    z = standardize_hierarchical(data.train.design, ls, terms)
    return z, data.train.y


def time_best(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    z, y = build_problem()
    opts = LassoOptions()
    dense_lam = 1e-3

    impls = kernels.available_kernels()
    if "cython" not in impls:
        print("note: compiled extension not built; benchmarking the fallback only")

    results = {}
    baselines = {}
    original = kernels.cd_solve
    try:
        for name, solve in impls.items():
            kernels.cd_solve = solve  # selectors resolve the kernel at call time
            path_t = time_best(lambda: fit_lasso_path(z, y, opts), args.repeats)
            dense_t = time_best(lambda: lasso_fit(z, y, dense_lam, opts), args.repeats)
            _, fits = fit_lasso_path(z, y, opts)
            results[name] = (path_t, dense_t)
            baselines[name] = fits[-1].coefs.values
    finally:
        kernels.cd_solve = original

    if len(baselines) == 2:
        drift = float(np.max(np.abs(baselines["cython"] - baselines["python"])))
        print(f"kernel agreement at the path bottom: max|diff| = {drift:.2e}")

    print(f"\n{'kernel':<8} {'path fit (100 lambdas)':>24} {'dense fit (lam=1e-3)':>22}")
    for name, (path_t, dense_t) in results.items():
        print(f"{name:<8} {path_t * 1e3:>21.1f} ms {dense_t * 1e3:>19.1f} ms")
    if len(results) == 2:
        speedup = results["python"][0] / results["cython"][0]
        print(f"\ncompiled kernel speedup on the path workload: {speedup:.1f}x")


if __name__ == "__main__":
    main()
