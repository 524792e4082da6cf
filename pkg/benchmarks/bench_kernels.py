#!/usr/bin/env python3
"""Benchmark the numba and pure-numpy paths of the hot pixel kernels.

Both paths accumulate in the same order, so outputs are checked for bitwise
equality before timing. Run:

    python benchmarks/bench_kernels.py [--size 128] [--repeats 20]
"""

import argparse
import time

import numpy as np

from fvdlens import _kernels
from fvdlens.distortion import motion_blur_kernel


def time_fn(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--size", type=int, default=128)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    if not _kernels.NUMBA_AVAILABLE:
        raise SystemExit("numba is not importable; nothing to compare")

    h = w = args.size
    rng = np.random.default_rng(0)
    frame = rng.uniform(0, 255, size=(h, w, 3))
    dx = rng.uniform(-4, 4, size=(h, w))
    dy = rng.uniform(-4, 4, size=(h, w))
    channel = rng.uniform(0, 255, size=(h, w))
    blur = motion_blur_kernel(13, 0.9)

    cases = [
        ("warp_bilinear", lambda force: _kernels.warp_bilinear(frame, dx, dy, force=force)),
        ("conv2d_reflect", lambda force: _kernels.conv2d_reflect(channel, blur, force=force)),
        ("smooth_gaussian", lambda force: _kernels.smooth_gaussian_reflect(channel, 3.2, force=force)),
    ]

    print(f"kernel benchmark at {h}x{w}, best of {args.repeats}")
    print(f"{'kernel':<16} {'numba':>10} {'numpy':>10} {'speedup':>8}  bitwise")
    for name, fn in cases:
        fn("numba")  # warm-up compile
        out_nb = fn("numba")
        out_np = fn("numpy")
        same = out_nb.tobytes() == out_np.tobytes()
        t_nb = time_fn(lambda: fn("numba"), args.repeats)
        t_np = time_fn(lambda: fn("numpy"), args.repeats)
        print(f"{name:<16} {t_nb * 1e3:>8.3f}ms {t_np * 1e3:>8.3f}ms {t_np / t_nb:>7.2f}x  {same}")


if __name__ == "__main__":
    main()
