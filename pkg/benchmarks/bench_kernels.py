"""Numba vs pure-numpy timing for the histogram/correlation kernels.

Part 1 times each kernel from ``so3align._accel.IMPLEMENTATIONS`` in this
process.  Part 2 runs one end-to-end alignment in two subprocesses, one
with ``SO3_ALIGN_DISABLE_NUMBA=1``, so the backend switch is exercised the
same way users flip it.

    python3 benchmarks/bench_kernels.py [--n 200000] [--bins 360]
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from so3align import _accel

END_TO_END = """
import json, time
from so3align import _accel, align, generate_scenario, plant_global, scenario
from so3align.synthesis import random_rotations
a = generate_scenario(scenario(1, {n}, seed=1))
b = plant_global(a, random_rotations(1, seed=2)[0], shuffle_seed=3)
align(a, b)
t0 = time.perf_counter()
for _ in range(3):
    align(a, b)
print(json.dumps({{"backend": _accel.BACKEND, "seconds": (time.perf_counter() - t0) / 3}}))
"""


def _time(fn, *args, number=5):
    fn(*args)  # compile / warm caches
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=3)) / number


def kernel_table(n, bins):
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(n, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    h_a, h_b = rng.random(bins), rng.random(bins)
    rows = []
    for name, impl in _accel.IMPLEMENTATIONS.items():
        rows.append(
            {
                "backend": name,
                "azimuth_histogram_s": _time(impl["azimuth_histogram"], pts, 2, bins),
                "polar_azimuth_histogram_s": _time(impl["polar_azimuth_histogram"], pts, 2, bins, 180),
                "circular_correlation_s": _time(impl["circular_correlation"], h_a, h_b),
            }
        )
    return rows


def end_to_end(n):
    out = []
    for disable in ("0", "1"):
        env = dict(os.environ, SO3_ALIGN_DISABLE_NUMBA=disable)
        res = subprocess.run([sys.executable, "-c", END_TO_END.format(n=n)], env=env, capture_output=True, text=True, check=True)
        out.append(json.loads(res.stdout.strip().splitlines()[-1]))
    return out


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--n", type=int, default=200_000)
    p.add_argument("--bins", type=int, default=360)
    p.add_argument("--skip-end-to-end", action="store_true")
    args = p.parse_args()

    print(f"kernels, n={args.n}, K={args.bins}")
    for row in kernel_table(args.n, args.bins):
        print(
            f"  {row['backend']:6s}  azimuth {row['azimuth_histogram_s'] * 1e3:8.3f} ms"
            f"  polar x azimuth {row['polar_azimuth_histogram_s'] * 1e3:8.3f} ms"
            f"  correlation {row['circular_correlation_s'] * 1e6:8.1f} us"
        )
    if not args.skip_end_to_end:
        print(f"end-to-end align, n={args.n}")
        for row in end_to_end(args.n):
            print(f"  {row['backend']:6s}  {row['seconds'] * 1e3:8.2f} ms")


if __name__ == "__main__":
    main()
