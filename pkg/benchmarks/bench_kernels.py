#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5]

Times trace_rings and fill_polygon on synthetic corpora at several sizes and
prints a table with the speedup. Both backends are imported directly, so
this runs regardless of MASKSEQ_KERNELS.
"""

import argparse
import time

import numpy as np

from maskseq._kernels import py as kernels_py

try:
    from maskseq._kernels import fast as kernels_fast
except ImportError:
    kernels_fast = None


def make_masks(rng, size, count):
    masks = []
    for _ in range(count):
        yy, xx = np.mgrid[0:size, 0:size]
        m = np.zeros((size, size), dtype=np.uint8)
        for _ in range(rng.integers(1, 4)):
            cx, cy = rng.uniform(size * 0.2, size * 0.8, 2)
            r = rng.uniform(size * 0.1, size * 0.3)
            m |= ((xx - cx) ** 2 + (yy - cy) ** 2 <= r * r).astype(np.uint8)
        masks.append(m)
    return masks


def make_rings(rng, size, count):
    rings = []
    for _ in range(count):
        n = int(rng.integers(8, 64))
        ang = np.sort(rng.uniform(0, 2 * np.pi, n))
        r = rng.uniform(size * 0.1, size * 0.45, n)
        rings.append(
            (size / 2 + r * np.cos(ang), size / 2 + r * np.sin(ang))
        )
    return rings


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if kernels_fast is None:
        print("compiled kernels not built; run `pip install -e .` first")
        return

    rng = np.random.default_rng(0)
    print(f"{'benchmark':<34} {'py':>10} {'fast':>10} {'speedup':>8}")
    for size, count in ((128, 40), (256, 20), (512, 8)):
        masks = make_masks(rng, size, count)
        t_py = best_of(lambda: [kernels_py.trace_rings(m) for m in masks], args.repeat)
        t_fast = best_of(lambda: [kernels_fast.trace_rings(m) for m in masks], args.repeat)
        name = f"trace_rings {size}x{size} x{count}"
        print(f"{name:<34} {t_py * 1e3:>8.1f}ms {t_fast * 1e3:>8.1f}ms {t_py / t_fast:>7.1f}x")
    for size, count in ((128, 40), (256, 20), (512, 8)):
        rings = make_rings(rng, size, count)
        t_py = best_of(
            lambda: [kernels_py.fill_polygon(x, y, size, size) for x, y in rings], args.repeat
        )
        t_fast = best_of(
            lambda: [kernels_fast.fill_polygon(x, y, size, size) for x, y in rings], args.repeat
        )
        name = f"fill_polygon {size}x{size} x{count}"
        print(f"{name:<34} {t_py * 1e3:>8.1f}ms {t_fast * 1e3:>8.1f}ms {t_py / t_fast:>7.1f}x")

    # end-to-end: full encode/decode round trip through the selected backend
    from maskseq import BinaryMask, QuantConfig, decode_mask, encode_mask

    masks256 = [BinaryMask(m) for m in make_masks(rng, 256, 20)]
    cfg = QuantConfig(image_w=256, image_h=256)

    def round_trip():
        for m in masks256:
            decode_mask(encode_mask(m, cfg), cfg)

    t = best_of(round_trip, args.repeat)
    from maskseq import KERNEL_BACKEND

    print(f"\nencode+decode 20 masks 256x256 ({KERNEL_BACKEND} backend): {t * 1e3:.1f}ms")


if __name__ == "__main__":
    main()
