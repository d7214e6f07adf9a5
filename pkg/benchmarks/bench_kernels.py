#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-python fallback.

Times the three hot kernels on representative problem sizes and prints a
small table with the speedup of the compiled backend.  Run as

    python3 benchmarks/bench_kernels.py [--repeats N]
"""
import argparse
import timeit

import numpy as np

from bitemper import _kernels_py

try:
    from bitemper import _kernels_cy
except ImportError:
    _kernels_cy = None


def make_problem(rng, p, m):
    bits = rng.integers(0, 2, p, dtype=np.uint8)
    modes = rng.integers(0, 2, (m, p), dtype=np.uint8)
    dists = np.sum(modes != bits[None, :], axis=1).astype(np.int64)
    return bits, dists, modes


def bench(fn, repeats):
    return min(timeit.repeat(fn, number=1, repeat=repeats))


def run(repeats):
    rng = np.random.default_rng(0)
    rows = []
    for p, m in ((16, 2), (200, 4), (3000, 6)):
        bits, dists, modes = make_problem(rng, p, m)
        out = np.empty(p)
        lr = rng.normal(0, 3, p)
        u_prop = rng.random(2000)
        u_acc = 1.0 - rng.random(2000)

        cases = {
            f"log_ratios p={p} m={m} x100": lambda impl: [
                impl.log_ratios(bits, dists, modes, 1.5, 0.8, out)
                for _ in range(100)],
            f"informed_step p={p} x100": lambda impl: [
                impl.informed_step(lr, 2, 1.0, 0.37) for _ in range(100)],
            f"ssiit_advance p={p} n=2000": lambda impl: impl.ssiit_advance(
                bits.copy(), dists.copy(), modes, 1.5, 0.8, 0.5, 1, 0.5,
                u_prop, u_acc, 2),
        }
        for label, body in cases.items():
            t_py = bench(lambda: body(_kernels_py), repeats)
            if _kernels_cy is not None:
                t_cy = bench(lambda: body(_kernels_cy), repeats)
                rows.append((label, t_py, t_cy, t_py / t_cy))
            else:
                rows.append((label, t_py, None, None))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    if _kernels_cy is None:
        print("compiled backend not available; timing pure python only")
    rows = run(args.repeats)
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':{width}}  {'python':>10}  {'cython':>10}  {'speedup':>8}")
    for label, t_py, t_cy, speed in rows:
        cy = f"{t_cy * 1e3:9.3f}ms" if t_cy is not None else "       n/a"
        sp = f"{speed:7.1f}x" if speed is not None else "     n/a"
        print(f"{label:{width}}  {t_py * 1e3:9.3f}ms  {cy}  {sp}")


if __name__ == "__main__":
    main()
