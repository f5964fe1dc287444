#!/usr/bin/env python3
"""Compare the compiled kernel against the pure-numpy fallback.

Times the block-sweep application and a full streaming Abel-average pass at
several window sizes.  Run after an editable install:

    python3 benchmarks/bench_kernels.py [--sizes 4096,65536] [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from cmvwalk import _corepy

try:
    from cmvwalk import _core
except ImportError:
    _core = None


def sweep_inputs(size: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    radii = 0.9 * np.sqrt(rng.uniform(0, 1, size))
    a = (radii * np.exp(1j * rng.uniform(0, 2 * np.pi, size))).astype(np.complex128)
    r = np.sqrt(1.0 - np.abs(a) ** 2)
    v = (rng.normal(size=size) + 1j * rng.normal(size=size)).astype(np.complex128)
    v[-4:] = 0.0
    return a, r, v


def time_best(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_sweeps(kernel, size: int, steps: int, repeats: int) -> float:
    a, r, v0 = sweep_inputs(size)

    def run():
        v = v0.copy()
        f = size - 5
        for _ in range(steps):
            kernel.lm_apply(a, r, v, f)

    return time_best(run, repeats)


def bench_abel(kernel, size: int, steps: int, repeats: int) -> float:
    a, r, v0 = sweep_inputs(size)

    def run():
        v = v0.copy()
        acc = np.zeros(size)
        comp = np.zeros(size)
        f = size - 5
        for t in range(steps):
            kernel.lm_apply(a, r, v, f)
            kernel.abel_accumulate(acc, comp, v, f, 0.999**t)

    return time_best(run, repeats)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="4096,32768,131072")
    parser.add_argument("--steps", type=int, default=200)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    backends = [("python", _corepy)]
    if _core is not None:
        backends.append(("c", _core))
    else:
        print("compiled kernel not built; timing the fallback only")

    header = f"{'bench':<14}{'size':>9}" + "".join(
        f"{name + ' [ms]':>14}" for name, _ in backends
    )
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for bench_name, bench in (("sweep", bench_sweeps), ("abel-pass", bench_abel)):
        for size in sizes:
            times = [
                bench(kernel, size, args.steps, args.repeats)
                for _, kernel in backends
            ]
            row = f"{bench_name:<14}{size:>9}" + "".join(
                f"{1e3 * t:>14.2f}" for t in times
            )
            if len(times) == 2:
                row += f"{times[0] / times[1]:>9.1f}x"
            print(row)


if __name__ == "__main__":
    main()
