"""Static SVG emission: metric line charts and mask/box overlays.

Hand-rolled on purpose: no raster dependency, byte-deterministic output,
diffable golden files.
"""

from __future__ import annotations

from typing import Sequence

_PALETTE = ("#1f6fb2", "#e1575a", "#3a9a5c", "#9467bd", "#8c564b")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def line_chart(
    series: dict[str, list[tuple[float, float]]],
    title: str,
    xlabel: str,
    ylabel: str,
    width: int = 640,
    height: int = 440,
) -> str:
    """Simple multi-series line chart with markers and a legend."""
    pad_l, pad_r, pad_t, pad_b = 64, 20, 40, 48
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    if not xs:
        raise ValueError("no data")
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    yr = y1 - y0
    y0, y1 = y0 - 0.05 * yr, y1 + 0.05 * yr

    def px(x: float) -> float:
        return pad_l + (x - x0) / (x1 - x0) * pw

    def py(y: float) -> float:
        return pad_t + (y1 - y) / (y1 - y0) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"'
        f' viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{pad_l}" y1="{pad_t}" x2="{pad_l}" y2="{pad_t + ph}" stroke="black"/>',
        f'<line x1="{pad_l}" y1="{pad_t + ph}" x2="{pad_l + pw}" y2="{pad_t + ph}" stroke="black"/>',
        f'<text x="{pad_l + pw / 2:.0f}" y="{height - 10}" text-anchor="middle">{xlabel}</text>',
        f'<text x="16" y="{pad_t + ph / 2:.0f}" text-anchor="middle"'
        f' transform="rotate(-90 16 {pad_t + ph / 2:.0f})">{ylabel}</text>',
    ]
    for k in range(5):
        ty = y0 + (y1 - y0) * k / 4
        parts.append(
            f'<line x1="{pad_l - 4}" y1="{_fmt(py(ty))}" x2="{pad_l}" y2="{_fmt(py(ty))}" stroke="black"/>'
            f'<text x="{pad_l - 8}" y="{_fmt(py(ty) + 4)}" text-anchor="end">{ty:.2f}</text>'
        )
    tick_xs = sorted({x for pts in series.values() for x, _ in pts})
    for tx in tick_xs:
        parts.append(
            f'<line x1="{_fmt(px(tx))}" y1="{pad_t + ph}" x2="{_fmt(px(tx))}" y2="{pad_t + ph + 4}" stroke="black"/>'
            f'<text x="{_fmt(px(tx))}" y="{pad_t + ph + 18}" text-anchor="middle">{tx:g}</text>'
        )
    for idx, name in enumerate(sorted(series)):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = sorted(series[name])
        path = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in pts)
        parts.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="2"/>')
        for x, y in pts:
            parts.append(f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="3" fill="{color}"/>')
        ly = pad_t + 16 + 18 * idx
        parts.append(
            f'<line x1="{pad_l + pw - 120}" y1="{ly}" x2="{pad_l + pw - 96}" y2="{ly}"'
            f' stroke="{color}" stroke-width="2"/>'
            f'<text x="{pad_l + pw - 90}" y="{ly + 4}">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def overlay_svg(
    image_href: str,
    width: int,
    height: int,
    polygons: Sequence[Sequence[tuple[float, float]]] = (),
    boxes: Sequence[tuple[float, float, float, float]] = (),
    no_target: bool = False,
) -> str:
    """Polygons/boxes drawn over an image reference (not embedded)."""
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"'
        f' viewBox="0 0 {width} {height}">',
        f'<image href="{image_href}" x="0" y="0" width="{width}" height="{height}"/>',
    ]
    for idx, poly in enumerate(polygons):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in poly)
        parts.append(
            f'<polygon points="{pts}" fill="{color}" fill-opacity="0.35"'
            f' stroke="{color}" stroke-width="1.5"/>'
        )
    for idx, (x0, y0, x1, y1) in enumerate(boxes):
        color = _PALETTE[idx % len(_PALETTE)]
        parts.append(
            f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0)}" height="{_fmt(y1 - y0)}"'
            f' fill="none" stroke="{color}" stroke-width="2"/>'
        )
    if no_target:
        parts.append(
            f'<g id="no-target"><text x="{width / 2:.0f}" y="{height / 2:.0f}" text-anchor="middle"'
            f' font-family="sans-serif" font-size="20" fill="#e1575a">no target</text></g>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
