"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the library's own code paths: the
point-in-polygon check is a per-pixel ray cast, the IoU oracle is plain
Python counting, and expected geometry values come from hand arithmetic.
"""

from __future__ import annotations

import numpy as np
import pytest

from maskseq import BinaryMask, extract_contours


def naive_inside_evenodd(px: float, py: float, ring: np.ndarray) -> bool:
    """Ray-cast even-odd test with the half-open vertex rule, one point at
    a time; independent of the scanline implementation.
    """
    n = len(ring)
    count = 0
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        if (y1 <= py) != (y2 <= py):
            xc = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
            if px < xc:
                count += 1
    return count % 2 == 1


def naive_rasterize(ring: np.ndarray, width: int, height: int) -> np.ndarray:
    out = np.zeros((height, width), dtype=bool)
    for j in range(height):
        for i in range(width):
            out[j, i] = naive_inside_evenodd(i + 0.5, j + 0.5, ring)
    return out


def naive_iou(a: np.ndarray, b: np.ndarray) -> float:
    inter = union = 0
    for va, vb in zip(a.flatten().tolist(), b.flatten().tolist()):
        inter += va and vb
        union += va or vb
    return 1.0 if union == 0 else inter / union


def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; returns hull vertices counterclockwise
    in math coords, i.e. clockwise on screen with y pointing down.
    """
    pts = sorted(map(tuple, points))

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                (x1, y1), (x2, y2) = out[-2], out[-1]
                if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return np.array(lower[:-1] + upper[:-1], dtype=float)


def random_convex_ring(rng: np.random.Generator, n: int = 12, radius: float = 80.0,
                       center=(128.0, 128.0)) -> np.ndarray:
    """Random convex polygon (hull of n random points), clockwise in y-down."""
    while True:
        cloud = np.column_stack([
            center[0] + rng.uniform(-radius, radius, size=n),
            center[1] + rng.uniform(-radius, radius, size=n),
        ])
        hull = _convex_hull(cloud)
        if hull.shape[0] >= 4:
            return hull


def rect_mask(x: int, y: int, w: int, h: int, size: int = 256) -> BinaryMask:
    m = np.zeros((size, size), dtype=bool)
    m[y : y + h, x : x + w] = True
    return BinaryMask(m)


def rectilinear_mask(rng: np.random.Generator, size: int = 256,
                     min_corners: int = 5, max_corners: int = 12) -> BinaryMask:
    """Union of 2-3 random rectangles, accepted when it forms a single
    component whose outline has a corner count in range.
    """
    while True:
        m = np.zeros((size, size), dtype=bool)
        for _ in range(int(rng.integers(2, 4))):
            w = int(rng.integers(30, 140))
            h = int(rng.integers(30, 140))
            px = int(rng.integers(5, size - 5 - w))
            py = int(rng.integers(5, size - 5 - h))
            m[py : py + h, px : px + w] = True
        mask = BinaryMask(m)
        contours = extract_contours(mask)
        if len(contours) == 1 and min_corners <= len(contours[0]) <= max_corners:
            return mask


def disk_mask(radius: float = 44.0, size: int = 128) -> BinaryMask:
    yy, xx = np.mgrid[0:size, 0:size]
    c = size / 2.0
    return BinaryMask((xx - c) ** 2 + (yy - c) ** 2 <= radius * radius)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240828)
