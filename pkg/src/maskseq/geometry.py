"""Core geometric types and operations.

Coordinates are pixels with the origin at the top-left corner, x growing
rightward and y growing downward. Pixel (i, j) covers the unit square
[i, i+1] x [j, j+1]; boundary rings therefore live on the integer lattice.
Under this y-down convention a clockwise-on-screen ring has positive
shoelace signed area.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from ._kernels import fill_polygon, trace_rings
from .errors import EmptyMaskError

Point = tuple[float, float]
BBox = tuple[float, float, float, float]  # x0, y0, x1, y1


class BinaryMask:
    """Rasterized boolean grid, row-major, shape (height, width)."""

    __slots__ = ("array",)

    def __init__(self, array: np.ndarray):
        arr = np.asarray(array)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"mask must be a non-empty 2-D grid, got shape {arr.shape}")
        self.array = np.ascontiguousarray(arr != 0)

    @property
    def width(self) -> int:
        return self.array.shape[1]

    @property
    def height(self) -> int:
        return self.array.shape[0]

    @property
    def pixel_count(self) -> int:
        return int(self.array.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.array.shape == other.array.shape and bool(
            np.array_equal(self.array, other.array)
        )

    def __repr__(self) -> str:
        return f"BinaryMask({self.width}x{self.height}, {self.pixel_count} px)"

    @classmethod
    def zeros(cls, width: int, height: int) -> "BinaryMask":
        return cls(np.zeros((height, width), dtype=bool))


class Contour:
    """Closed ring of subpixel points; the last point connects to the first.

    Requires at least 3 points and no two identical consecutive points
    (including the implicit last-to-first edge when they coincide exactly).
    """

    __slots__ = ("points",)

    def __init__(self, points: np.ndarray | Sequence[Point]):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("contour points must be an (N, 2) array")
        if pts.shape[0] < 3:
            raise ValueError("contour needs at least 3 points")
        if not np.isfinite(pts).all():
            raise ValueError("contour points must be finite")
        nxt = np.roll(pts, -1, axis=0)
        if (np.abs(pts - nxt).max(axis=1) == 0).any():
            raise ValueError("contour has identical consecutive points")
        self.points = pts

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def signed_area(self) -> float:
        return signed_ring_area(self.points)

    @property
    def clockwise(self) -> bool:
        """True for screen-clockwise rings (positive signed area, y down)."""
        return self.signed_area > 0

    @property
    def bbox(self) -> BBox:
        xs, ys = self.points[:, 0], self.points[:, 1]
        return (float(xs.min()), float(ys.min()), float(xs.max()), float(ys.max()))

    def __repr__(self) -> str:
        return f"Contour({len(self)} points, area {abs(self.signed_area):.1f})"


def signed_ring_area(points: np.ndarray) -> float:
    """Shoelace signed area of a closed ring (positive = clockwise, y down)."""
    pts = np.asarray(points, dtype=np.float64)
    x, y = pts[:, 0], pts[:, 1]
    x2, y2 = np.roll(x, -1), np.roll(y, -1)
    return float(0.5 * np.sum(x * y2 - x2 * y))


def shoelace_area(c: Contour) -> float:
    """Absolute polygon area in square pixels."""
    return abs(c.signed_area)


def ring_perimeter(points: np.ndarray) -> float:
    pts = np.asarray(points, dtype=np.float64)
    seg = np.roll(pts, -1, axis=0) - pts
    return float(np.hypot(seg[:, 0], seg[:, 1]).sum())


def extract_contours(mask: BinaryMask) -> list[Contour]:
    """Outer contour of every 8-connected foreground component.

    Rings are traced clockwise along pixel boundaries (integer lattice) in
    row-major discovery order. Holes are dropped: the sequence format cannot
    represent them. An all-background mask yields an empty list.
    """
    rings = trace_rings(mask.array.view(np.uint8))
    return [Contour(r.astype(np.float64)) for r in rings]


def largest_contour(contours: Iterable[Contour]) -> Contour:
    """Contour with maximal absolute area; ties go to the earliest one."""
    best = None
    best_area = -1.0
    for c in contours:
        area = abs(c.signed_area)
        if area > best_area:
            best, best_area = c, area
    if best is None:
        raise ValueError("no contour")
    return best


def rasterize_polygon(ring: np.ndarray | Sequence[Point], width: int, height: int) -> BinaryMask:
    """Fill a polygon onto a grid: pixel (i, j) is set iff its center
    (i + 0.5, j + 0.5) lies inside under the even-odd rule.

    Self-intersecting rings are legal (model outputs can produce them);
    geometry outside the grid is clipped by the grid bounds.
    """
    pts = np.asarray(ring, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise ValueError("degenerate polygon: need at least 3 points")
    if not np.isfinite(pts).all():
        raise ValueError("polygon points must be finite")
    return BinaryMask(fill_polygon(pts[:, 0], pts[:, 1], int(width), int(height)))


def mask_iou(a: BinaryMask, b: BinaryMask) -> float:
    """Intersection over union of two equal-sized masks.

    Both empty counts as 1.0, matching the no-target scoring convention.
    """
    if a.array.shape != b.array.shape:
        raise ValueError(
            f"mask dimensions differ: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    union = int(np.logical_or(a.array, b.array).sum())
    if union == 0:
        return 1.0
    inter = int(np.logical_and(a.array, b.array).sum())
    return inter / union


def box_iou(a: BBox, b: BBox) -> float:
    """Standard IoU on axis-aligned boxes."""
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    if union <= 0:
        return 0.0
    return inter / union


def mask_union(masks: Sequence[BinaryMask], width: int, height: int) -> BinaryMask:
    """OR of masks onto a width x height grid (empty input -> empty mask)."""
    acc = np.zeros((height, width), dtype=bool)
    for m in masks:
        if m.array.shape != acc.shape:
            raise ValueError("mask dimensions differ within union")
        acc |= m.array
    return BinaryMask(acc)


def require_foreground(mask: BinaryMask) -> None:
    if not mask.array.any():
        raise EmptyMaskError("no foreground")
