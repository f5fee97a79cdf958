"""Pure numpy/Python kernels: boundary tracing and polygon fill.

Reference implementations for the compiled module in fast.pyx. Both backends
must produce bit-identical outputs; the parity tests enforce this.
"""

from __future__ import annotations

import numpy as np

# Crack-following direction tables, indexed E=0, S=1, W=2, N=3 (y grows down).
# AHEAD_LEFT / AHEAD_RIGHT are the pixel offsets, relative to the lattice
# point just stepped onto, of the two pixels that decide the next turn.
_DX = (1, 0, -1, 0)
_DY = (0, 1, 0, -1)
_AHEAD_LEFT = ((0, -1), (0, 0), (-1, 0), (-1, -1))
_AHEAD_RIGHT = ((0, 0), (-1, 0), (-1, -1), (0, -1))
_TURN_LEFT = (3, 0, 1, 2)
_TURN_RIGHT = (1, 2, 3, 0)


def _trace_one(mask: np.ndarray, x0: int, y0: int, visited: np.ndarray):
    """Walk one boundary ring clockwise (foreground kept on the right).

    Returns (vertices, signed_area2) where vertices holds the turn points in
    walk order starting at (x0, y0) and signed_area2 is twice the shoelace
    area (positive for outer rings under the y-down clockwise convention).
    """
    h, w = mask.shape
    px, py = x0, y0
    d = 0  # start walking east along the pixel's top edge
    verts = []
    area2 = 0
    while True:
        if d == 0:
            visited[py, px] = True
        nx = px + _DX[d]
        ny = py + _DY[d]
        area2 += px * ny - nx * py
        lx, ly = nx + _AHEAD_LEFT[d][0], ny + _AHEAD_LEFT[d][1]
        rx, ry = nx + _AHEAD_RIGHT[d][0], ny + _AHEAD_RIGHT[d][1]
        left_fg = 0 <= lx < w and 0 <= ly < h and mask[ly, lx]
        right_fg = 0 <= rx < w and 0 <= ry < h and mask[ry, rx]
        if left_fg:
            nd = _TURN_LEFT[d]
        elif right_fg:
            nd = d
        else:
            nd = _TURN_RIGHT[d]
        if nd != d:
            verts.append((nx, ny))
        px, py, d = nx, ny, nd
        if px == x0 and py == y0 and d == 0:
            break
    # walk appends the start corner last; rotate it to the front
    verts = [verts[-1]] + verts[:-1]
    return verts, area2


def trace_rings(mask: np.ndarray) -> list[np.ndarray]:
    """Outer boundary rings of all 8-connected foreground components.

    mask: uint8/bool array (H, W). Returns one (K, 2) int32 array of lattice
    vertices per component, clockwise (positive shoelace area, y down), in
    row-major discovery order. Hole boundaries are traced but discarded.
    """
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    h, w = mask.shape
    # candidate ring starts: foreground pixel with background (or edge) above
    above_bg = np.ones_like(mask, dtype=bool)
    above_bg[1:, :] = mask[:-1, :] == 0
    starts = np.argwhere((mask != 0) & above_bg)
    visited = np.zeros((h + 1, w), dtype=bool)
    rings = []
    for y, x in starts:
        if visited[y, x]:
            continue
        verts, area2 = _trace_one(mask, int(x), int(y), visited)
        if area2 > 0:
            rings.append(np.array(verts, dtype=np.int32))
    return rings


def fill_polygon(xs: np.ndarray, ys: np.ndarray, width: int, height: int) -> np.ndarray:
    """Even-odd scanline fill: pixel (i, j) set iff its center is inside.

    xs, ys: float64 polygon vertices (closed implicitly). Geometry outside
    the grid is clipped by the fill bounds. Returns uint8 (height, width).
    """
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    out = np.zeros((height, width), dtype=np.uint8)
    if xs.size < 3:
        return out
    x2 = np.roll(xs, -1)
    y2 = np.roll(ys, -1)
    ymin = max(0, int(np.floor(ys.min() - 0.5)))
    ymax = min(height, int(np.ceil(ys.max() + 0.5)))
    for j in range(ymin, ymax):
        yc = j + 0.5
        crosses = (ys <= yc) != (y2 <= yc)
        if not crosses.any():
            continue
        t = (yc - ys[crosses]) / (y2[crosses] - ys[crosses])
        cx = np.sort(xs[crosses] + t * (x2[crosses] - xs[crosses]))
        for k in range(0, cx.size - 1, 2):
            i0 = int(np.ceil(cx[k] - 0.5))
            i1 = int(np.ceil(cx[k + 1] - 0.5)) - 1
            if i1 < 0 or i0 >= width:
                continue
            out[j, max(i0, 0) : min(i1, width - 1) + 1] = 1
    return out
