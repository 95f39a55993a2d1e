"""Compare the compiled and pure kernel backends.

Run with ``python benchmarks/bench_kernels.py``; prints one line per kernel
and backend with the best of several timings.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from haarlab import kernels
from haarlab.maximal import c1_problem
from haarlab.rearrange import generate


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--k", type=int, default=16, help="vectors in the Rademacher average")
    ap.add_argument("--depth", type=int, default=3, help="depth of the C1 rearrangement")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    A = rng.standard_normal((64, args.k, 3))
    counts = np.full(64, args.k, dtype=np.int64)
    tau = generate("randominjection", args.depth, 0)
    prob, _ = c1_problem(tau, sorted(tau.image))
    stop = 1 << prob.n

    print(f"backends available: {sorted(kernels.BACKENDS)} (default {kernels.BACKEND})")
    results = {}
    for name in sorted(kernels.BACKENDS):
        rad = best_of(lambda: kernels.rademacher_average(A, counts, 2.0, 2.0, which=name), args.repeat)
        srch = best_of(lambda: prob.search(1, stop, which=name), args.repeat)
        results[name] = (rad, srch)
        print(f"{name:>9}  rademacher 64 cells x 2^{args.k}: {rad * 1e3:9.2f} ms   "
              f"c1 search 2^{prob.n} subsets: {srch * 1e3:9.2f} ms")
    if len(results) == 2:
        (pr, ps), (cr, cs) = results["pure"], results["compiled"]
        print(f"  speedup  rademacher x{pr / cr:.1f}   c1 search x{ps / cs:.1f}")


if __name__ == "__main__":
    main()
