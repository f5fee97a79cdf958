#!/usr/bin/env python3
"""Generates the parity fixture corpus: 50 masks, each as PNG + RLE JSON.

Deterministic (fixed seed); reruns overwrite in place. The parity tests
drive the bindings with the RLE files and the CLI with the PNG files, so
encode outputs must match byte for byte.
"""

import json
from pathlib import Path

import numpy as np

from maskseq import BinaryMask, rasterize_polygon
from maskseq.maskio import rle_encode, write_png

OUT = Path(__file__).resolve().parent.parent / "test" / "fixtures"


def make_mask(rng: np.random.Generator, idx: int) -> BinaryMask:
    size = int(rng.integers(48, 160))
    kind = idx % 4
    if kind == 0:  # rectangle
        w = int(rng.integers(8, size - 8))
        h = int(rng.integers(8, size - 8))
        x = int(rng.integers(1, size - w))
        y = int(rng.integers(1, size - h))
        arr = np.zeros((size, size), bool)
        arr[y : y + h, x : x + w] = True
        return BinaryMask(arr)
    if kind == 1:  # disk
        yy, xx = np.mgrid[0:size, 0:size]
        r = rng.uniform(size * 0.15, size * 0.4)
        cx, cy = rng.uniform(size * 0.3, size * 0.7, 2)
        return BinaryMask((xx - cx) ** 2 + (yy - cy) ** 2 <= r * r)
    if kind == 2:  # random star polygon
        n = int(rng.integers(5, 12))
        ang = np.sort(rng.uniform(0, 2 * np.pi, n))
        rad = rng.uniform(size * 0.15, size * 0.45, n)
        ring = np.column_stack(
            [size / 2 + rad * np.cos(ang), size / 2 + rad * np.sin(ang)]
        )
        return rasterize_polygon(ring, size, size)
    # two components: encoder must pick the larger one
    arr = np.zeros((size, size), bool)
    w = int(rng.integers(10, size // 2 - 2))
    arr[2 : 2 + w, 2 : 2 + w] = True
    arr[size - 6 : size - 2, size - 6 : size - 2] = True
    return BinaryMask(arr)


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240901)
    manifest = []
    count = 0
    while count < 50:
        mask = make_mask(rng, count)
        if mask.pixel_count == 0:
            continue
        stem = f"mask_{count:02d}"
        write_png(mask, OUT / f"{stem}.png")
        with open(OUT / f"{stem}.json", "w", encoding="utf-8") as fh:
            json.dump(rle_encode(mask), fh)
        manifest.append({"stem": stem, "width": mask.width, "height": mask.height})
        count += 1
    with open(OUT / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
    print(f"wrote {count} fixture masks to {OUT}")


if __name__ == "__main__":
    main()
