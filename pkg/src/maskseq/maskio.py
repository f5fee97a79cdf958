"""Mask file I/O: PNG (any nonzero pixel = foreground) and COCO
uncompressed RLE (column-major counts, leading zero-run first).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .geometry import BinaryMask


def read_png(path: str | Path) -> BinaryMask:
    img = Image.open(path)
    arr = np.asarray(img.convert("L"))
    return BinaryMask(arr != 0)


def write_png(mask: BinaryMask, path: str | Path) -> None:
    arr = (mask.array.astype(np.uint8)) * 255
    Image.fromarray(arr, mode="L").save(path, format="PNG")


def rle_encode(mask: BinaryMask) -> dict:
    """COCO uncompressed RLE: {"counts": [...], "size": [height, width]}."""
    flat = mask.array.flatten(order="F").astype(np.uint8)
    if flat.size == 0:
        return {"counts": [], "size": [mask.height, mask.width]}
    change = np.flatnonzero(np.diff(flat)) + 1
    bounds = np.concatenate(([0], change, [flat.size]))
    counts = np.diff(bounds).tolist()
    if flat[0] == 1:  # counts always start with the zero-run, even if empty
        counts = [0] + counts
    return {"counts": counts, "size": [mask.height, mask.width]}


def rle_decode(rle: dict) -> BinaryMask:
    h, w = int(rle["size"][0]), int(rle["size"][1])
    counts = np.asarray(rle["counts"], dtype=np.int64)
    if counts.sum() != h * w:
        raise ValueError(f"RLE counts sum {counts.sum()} != {h}*{w}")
    values = np.arange(counts.size, dtype=np.uint8) % 2  # 0-run first
    flat = np.repeat(values, counts)
    return BinaryMask(flat.reshape((h, w), order="F"))


def read_mask(path: str | Path) -> BinaryMask:
    """Dispatch on extension: .png -> PNG, .json -> COCO RLE."""
    p = Path(path)
    if p.suffix.lower() == ".json":
        with open(p, encoding="utf-8") as fh:
            return rle_decode(json.load(fh))
    return read_png(p)


def write_mask(mask: BinaryMask, path: str | Path) -> None:
    p = Path(path)
    if p.suffix.lower() == ".json":
        with open(p, "w", encoding="utf-8") as fh:
            json.dump(rle_encode(mask), fh)
    else:
        write_png(mask, p)
