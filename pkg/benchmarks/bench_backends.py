"""Benchmark the compiled kernels against the pure numpy fallback.

Runs the three hot kernels on identical streams under both backends,
checks the outputs agree, and prints wall times with the speedup.

    python benchmarks/bench_backends.py [--quick]
"""

import argparse
import time

import numpy as np

from interface_lab import _kernels_py
from interface_lab.rng import compose_stream_id, philox

try:
    from interface_lab import _kernels as compiled
except ImportError:
    compiled = None


def streams(seed, lane, n):
    return [philox(seed, compose_stream_id(lane, p)) for p in range(n)]


def bench(label, fn_args_builder, n_paths, n_steps, repeats=1):
    results = {}
    rows = []
    for name, impl in (("compiled", compiled), ("pure", _kernels_py)):
        if impl is None:
            continue
        best = float("inf")
        for _ in range(repeats):
            args = fn_args_builder(impl)
            t0 = time.perf_counter()
            out = getattr(impl, args[0])(*args[1:])
            best = min(best, time.perf_counter() - t0)
        results[name] = out
        rate = n_paths * n_steps / best / 1e6
        rows.append((name, best, rate))
    for name, secs, rate in rows:
        print(f"  {name:>8}: {secs:8.3f}s  ({rate:7.1f} M steps/s)")
    if len(rows) == 2:
        print(f"  speedup : {rows[1][1] / rows[0][1]:8.1f}x")
    if compiled is not None:
        a, b = results["compiled"], results["pure"]
        if isinstance(a, tuple):
            agree = all(np.array_equal(x, y, equal_nan=True) for x, y in zip(a, b))
        else:
            agree = np.array_equal(a, b, equal_nan=True)
        print(f"  outputs identical: {agree}")
        if not agree:
            raise SystemExit(f"backend mismatch in {label}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = parser.parse_args()

    if compiled is None:
        print("compiled backend not built; timing the pure backend only\n")

    scale = 0.1 if args.quick else 1.0
    n_paths = max(256, int(8192 * scale))
    n_steps = max(200, int(2000 * scale))
    alpha, dt = 2.0 / 3.0, 1e-3

    print(f"simulate_summaries: {n_paths} paths x {n_steps} steps")
    bench(
        "summaries",
        lambda impl: ("simulate_summaries", streams(1, 1, n_paths), 0.0, alpha, dt, n_steps),
        n_paths, n_steps,
    )

    print(f"\nsimulate_fpt (bridge on): {n_paths} paths x {n_steps} steps")
    bench(
        "fpt",
        lambda impl: ("simulate_fpt", streams(1, 2, n_paths), -1.0, 0.5, alpha, dt,
                      n_steps, True),
        n_paths, n_steps,
    )

    n_long = max(2000, int(200_000 * scale))
    print(f"\nsimulate_path: 1 path x {n_long} steps")
    bench(
        "path",
        lambda impl: ("simulate_path", philox(1, compose_stream_id(3, 0)), 0.0,
                      alpha, dt, n_long),
        1, n_long,
    )


if __name__ == "__main__":
    main()
