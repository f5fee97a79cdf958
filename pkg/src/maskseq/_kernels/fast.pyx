# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: boundary tracing and polygon fill.

Mirrors py.py operation for operation; outputs must stay bit-identical with
the fallback (enforced by the parity tests).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, floor

cnp.import_array()

cdef int[4] _DX = [1, 0, -1, 0]
cdef int[4] _DY = [0, 1, 0, -1]
cdef int[4] _ALX = [0, 0, -1, -1]
cdef int[4] _ALY = [-1, 0, 0, -1]
cdef int[4] _ARX = [0, -1, -1, 0]
cdef int[4] _ARY = [0, 0, -1, -1]
cdef int[4] _TURN_LEFT = [3, 0, 1, 2]
cdef int[4] _TURN_RIGHT = [1, 2, 3, 0]


cdef _trace_one(const unsigned char[:, ::1] mask, int x0, int y0,
                unsigned char[:, ::1] visited):
    cdef int h = mask.shape[0]
    cdef int w = mask.shape[1]
    cdef int px = x0, py = y0, d = 0
    cdef int nx, ny, nd, lx, ly, rx, ry
    cdef bint left_fg, right_fg
    cdef long long area2 = 0
    cdef list verts = []
    while True:
        if d == 0:
            visited[py, px] = 1
        nx = px + _DX[d]
        ny = py + _DY[d]
        area2 += <long long> px * ny - <long long> nx * py
        lx = nx + _ALX[d]
        ly = ny + _ALY[d]
        rx = nx + _ARX[d]
        ry = ny + _ARY[d]
        left_fg = 0 <= lx < w and 0 <= ly < h and mask[ly, lx] != 0
        right_fg = 0 <= rx < w and 0 <= ry < h and mask[ry, rx] != 0
        if left_fg:
            nd = _TURN_LEFT[d]
        elif right_fg:
            nd = d
        else:
            nd = _TURN_RIGHT[d]
        if nd != d:
            verts.append((nx, ny))
        px = nx
        py = ny
        d = nd
        if px == x0 and py == y0 and d == 0:
            break
    verts = [verts[len(verts) - 1]] + verts[: len(verts) - 1]
    return verts, area2


def trace_rings(mask):
    """Outer boundary rings of all 8-connected foreground components."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] m = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef const unsigned char[:, ::1] mv = m
    cdef int h = m.shape[0]
    cdef int w = m.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] visited = np.zeros((h + 1, w), dtype=np.uint8)
    cdef unsigned char[:, ::1] vv = visited
    cdef list rings = []
    cdef int x, y
    cdef long long area2
    for y in range(h):
        for x in range(w):
            if mv[y, x] != 0 and (y == 0 or mv[y - 1, x] == 0) and vv[y, x] == 0:
                verts, area2 = _trace_one(mv, x, y, vv)
                if area2 > 0:
                    rings.append(np.array(verts, dtype=np.int32))
    return rings


def fill_polygon(xs, ys, int width, int height):
    """Even-odd scanline fill; pixel centers at (i + 0.5, j + 0.5)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ax = np.ascontiguousarray(xs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ay = np.ascontiguousarray(ys, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.zeros((height, width), dtype=np.uint8)
    cdef int n = ax.shape[0]
    if n < 3:
        return out
    cdef const double[::1] x = ax
    cdef const double[::1] y = ay
    cdef unsigned char[:, ::1] o = out
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cross_buf = np.empty(n, dtype=np.float64)
    cdef double[::1] cx = cross_buf
    cdef double ylo = ay.min()
    cdef double yhi = ay.max()
    # clamp in double space before casting: bounds can overflow C int
    cdef double dymin = floor(ylo - 0.5)
    cdef double dymax = ceil(yhi + 0.5)
    cdef int ymin = 0 if dymin < 0 else (height if dymin > height else <int> dymin)
    cdef int ymax = height if dymax > height else (0 if dymax < 0 else <int> dymax)
    cdef int j, e, k, m, a, b
    cdef double yc, y1, y2, t, v, d0, d1
    for j in range(ymin, ymax):
        yc = j + 0.5
        m = 0
        for e in range(n):
            y1 = y[e]
            y2 = y[(e + 1) % n]
            if (y1 <= yc) != (y2 <= yc):
                t = (yc - y1) / (y2 - y1)
                cx[m] = x[e] + t * (x[(e + 1) % n] - x[e])
                m += 1
        if m == 0:
            continue
        # insertion sort: m is tiny (crossings per scanline)
        for k in range(1, m):
            v = cx[k]
            e = k - 1
            while e >= 0 and cx[e] > v:
                cx[e + 1] = cx[e]
                e -= 1
            cx[e + 1] = v
        for k in range(0, m - 1, 2):
            # clamp in double space: crossings can sit far outside int range
            d0 = ceil(cx[k] - 0.5)
            d1 = ceil(cx[k + 1] - 0.5) - 1.0
            if d1 < 0 or d0 >= width:
                continue
            a = <int> d0 if d0 > 0 else 0
            b = <int> d1 if d1 < width - 1 else width - 1
            for e in range(a, b + 1):
                o[j, e] = 1
    return out
