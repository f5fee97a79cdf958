"""Coordinate quantization and the grounding wire format.

A mask becomes a fixed-length sequence of quantized points: trace the
outer contour, sample it (uniform or adaptive), rotate to a canonical start
point, then map every coordinate into integer bins:

    q = round(value / image_dim * n_bins), half away from zero,
    clamped into [0, n_bins - 1].

Dequantization is the left-edge inverse q * image_dim / n_bins, which makes
the round-trip error at most image_dim / n_bins per axis.

Serialized text, byte for byte:

    no target      -> ""                       (empty string)
    boxes          -> "[x0, y0, x1, y1]"       joined by "<bsep>"
    mask sequences -> "[x0, y0, x1, y1, ...]"  joined by "<msep>"

docs/grammar.ebnf holds the grammar; parse_grounding is its inverse.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError
from .geometry import BinaryMask, Contour, extract_contours, largest_contour, rasterize_polygon, require_foreground
from .sampling import SamplingConfig, sample_contour

logger = logging.getLogger(__name__)

BSEP = "<bsep>"
MSEP = "<msep>"


@dataclass(frozen=True)
class QuantConfig:
    image_w: float
    image_h: float
    n_bins: int = 1000

    def __post_init__(self):
        if self.n_bins < 2:
            raise ValueError("n_bins must be >= 2")
        if self.image_w <= 0 or self.image_h <= 0:
            raise ValueError("image dimensions must be positive")


@dataclass(frozen=True)
class QuantSeq:
    """Fixed-length list of quantized (x, y) pairs."""

    coords: tuple[tuple[int, int], ...]

    @property
    def point_count(self) -> int:
        return len(self.coords)

    def flat(self) -> list[int]:
        return [v for xy in self.coords for v in xy]


QuantBox = tuple[int, int, int, int]


@dataclass(frozen=True)
class GroundingOutput:
    """Parsed model output: nothing, boxes, or mask sequences.

    `warnings` counts lenient-mode repairs and does not affect equality.
    """

    kind: str  # "no_target" | "boxes" | "masks"
    boxes: tuple[QuantBox, ...] = ()
    masks: tuple[QuantSeq, ...] = ()
    warnings: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.kind == "no_target":
            if self.boxes or self.masks:
                raise ValueError("no-target output carries no geometry")
        elif self.kind == "boxes":
            if not self.boxes or self.masks:
                raise ValueError("boxes output needs a non-empty box list")
        elif self.kind == "masks":
            if not self.masks or self.boxes:
                raise ValueError("masks output needs a non-empty sequence list")
        else:
            raise ValueError(f"unknown kind {self.kind!r}")

    @classmethod
    def no_target(cls) -> "GroundingOutput":
        return cls(kind="no_target")

    @classmethod
    def of_boxes(cls, boxes, warnings: int = 0) -> "GroundingOutput":
        return cls(kind="boxes", boxes=tuple(tuple(b) for b in boxes), warnings=warnings)

    @classmethod
    def of_masks(cls, masks, warnings: int = 0) -> "GroundingOutput":
        seqs = tuple(m if isinstance(m, QuantSeq) else QuantSeq(tuple(map(tuple, m))) for m in masks)
        return cls(kind="masks", masks=seqs, warnings=warnings)


def _round_half_away(v: float) -> int:
    return int(math.floor(abs(v) + 0.5) * (1 if v >= 0 else -1))


def quantize(p, cfg: QuantConfig) -> tuple[int, int]:
    """Quantize one (x, y) point; out-of-range input clamps into the grid."""
    x, y = float(p[0]), float(p[1])
    if x < 0 or y < 0:
        logger.debug("negative coordinate (%g, %g) clamped to 0", x, y)
    qx = _round_half_away(x / cfg.image_w * cfg.n_bins)
    qy = _round_half_away(y / cfg.image_h * cfg.n_bins)
    top = cfg.n_bins - 1
    return (min(max(qx, 0), top), min(max(qy, 0), top))


def quantize_points(pts: np.ndarray, cfg: QuantConfig) -> np.ndarray:
    """Vectorized quantize over an (N, 2) array; returns int64 (N, 2)."""
    pts = np.asarray(pts, dtype=np.float64)
    scaled = pts * np.array([cfg.n_bins / cfg.image_w, cfg.n_bins / cfg.image_h])
    neg = scaled < 0
    if neg.any():
        logger.debug("%d negative coordinates clamped to 0", int(neg.sum()))
    q = np.floor(np.abs(scaled) + 0.5).astype(np.int64)
    q[neg] *= -1
    return np.clip(q, 0, cfg.n_bins - 1)


def dequantize(q, cfg: QuantConfig) -> tuple[float, float]:
    qx, qy = int(q[0]), int(q[1])
    if not (0 <= qx < cfg.n_bins and 0 <= qy < cfg.n_bins):
        raise ValueError(f"bin out of range: ({qx}, {qy}) with n_bins={cfg.n_bins}")
    return (qx * cfg.image_w / cfg.n_bins, qy * cfg.image_h / cfg.n_bins)


def dequantize_seq(seq: QuantSeq, cfg: QuantConfig) -> np.ndarray:
    q = np.asarray(seq.coords, dtype=np.float64)
    if (q < 0).any() or (q >= cfg.n_bins).any():
        raise ValueError(f"bin out of range in sequence (n_bins={cfg.n_bins})")
    return q * np.array([cfg.image_w / cfg.n_bins, cfg.image_h / cfg.n_bins])


def canonicalize(points: np.ndarray, cfg: QuantConfig) -> np.ndarray:
    """Rotate a ring so it starts at the point with the lexicographically
    smallest (quantized y, quantized x); order is otherwise preserved.

    Comparing in quantized space keeps the start point stable across
    encode -> decode -> encode round trips.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.shape[0] < 3:
        raise ValueError("need at least 3 points")
    q = quantize_points(pts, cfg)
    first = int(np.lexsort((q[:, 0], q[:, 1]))[0])  # lexsort is stable: ties keep low index
    return np.roll(pts, -first, axis=0)


def encode_contour(
    ring: Contour | np.ndarray,
    cfg: QuantConfig,
    scfg: SamplingConfig | None = None,
    method: str = "adaptive",
) -> QuantSeq:
    """Sample a known boundary ring into a sequence.

    This is the path for polygon-annotated ground truth: the annotation
    polygon is the object's true contour, with exact-zero turning angles
    along straight runs, which is what the angle-ranked selection needs.
    (Re-rasterizing and re-tracing first buries that signal in pixel
    staircase noise.) Counterclockwise input is reversed so sampling
    always walks clockwise.
    """
    scfg = scfg or SamplingConfig()
    c = ring if isinstance(ring, Contour) else Contour(ring)
    if not c.clockwise:
        c = Contour(c.points[::-1])
    pts = sample_contour(c, scfg, method)
    pts = canonicalize(pts, cfg)
    q = quantize_points(pts, cfg)
    return QuantSeq(tuple((int(x), int(y)) for x, y in q))


def encode_mask(
    mask: BinaryMask,
    cfg: QuantConfig,
    scfg: SamplingConfig | None = None,
    method: str = "adaptive",
) -> QuantSeq:
    """Full mask -> sequence pipeline: trace, take the largest outer ring,
    sample n_out points, canonicalize the start, quantize.
    """
    require_foreground(mask)
    ring = largest_contour(extract_contours(mask))
    return encode_contour(ring, cfg, scfg, method)


def decode_mask(seq: QuantSeq, cfg: QuantConfig) -> BinaryMask:
    """Rasterize a sequence back onto the image grid (dims rounded up)."""
    if seq.point_count < 3:
        raise ValueError("degenerate sequence: need at least 3 points")
    pts = dequantize_seq(seq, cfg)
    return rasterize_polygon(pts, int(math.ceil(cfg.image_w)), int(math.ceil(cfg.image_h)))


def contour_from_seq(seq: QuantSeq, cfg: QuantConfig) -> Contour:
    """Dequantized polygon as a Contour (duplicate pad points collapsed)."""
    pts = dequantize_seq(seq, cfg)
    keep = np.ones(pts.shape[0], dtype=bool)
    keep[1:] = (np.diff(pts, axis=0) != 0).any(axis=1)
    pts = pts[keep]
    if pts.shape[0] > 1 and (pts[0] == pts[-1]).all():
        pts = pts[:-1]
    return Contour(pts)


# --- serialization -----------------------------------------------------------


def _group(ints) -> str:
    return "[" + ", ".join(str(int(v)) for v in ints) + "]"


def serialize(out: GroundingOutput) -> str:
    if out.kind == "no_target":
        return ""
    if out.kind == "boxes":
        return BSEP.join(_group(b) for b in out.boxes)
    return MSEP.join(_group(m.flat()) for m in out.masks)


# --- parsing -----------------------------------------------------------------


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


class _GroupScanner:
    """Scans one bracketed integer list, reporting offsets into the full text."""

    def __init__(self, text: str, start: int, end: int):
        self.text = text
        self.i = start
        self.end = end

    def error(self, message: str, at: int | None = None) -> ParseError:
        return ParseError(message, _byte_offset(self.text, self.i if at is None else at))

    def skip_ws(self) -> None:
        while self.i < self.end and self.text[self.i].isspace():
            self.i += 1

    def expect(self, ch: str) -> None:
        if self.i >= self.end or self.text[self.i] != ch:
            raise self.error(f"expected {ch!r}")
        self.i += 1

    def integer(self) -> tuple[int, int]:
        start = self.i
        if self.i < self.end and self.text[self.i] in "+-":
            self.i += 1
        digits = self.i
        # ASCII digits only: str.isdigit() admits characters int() rejects
        while self.i < self.end and "0" <= self.text[self.i] <= "9":
            self.i += 1
        if self.i == digits:
            raise self.error("non-integer token", at=start)
        return int(self.text[start : self.i]), start

    def scan(self) -> list[tuple[int, int]]:
        self.skip_ws()
        self.expect("[")
        self.skip_ws()
        if self.i < self.end and self.text[self.i] == "]":
            raise self.error("empty bracket group")
        values = []
        while True:
            self.skip_ws()
            values.append(self.integer())
            self.skip_ws()
            if self.i < self.end and self.text[self.i] == ",":
                self.i += 1
                continue
            self.expect("]")
            break
        self.skip_ws()
        if self.i < self.end:
            raise self.error("unexpected trailing characters")
        return values


def parse_grounding(
    text: str,
    mode: str = "strict",
    expect: str = "masks",
    n_bins: int = 1000,
) -> GroundingOutput:
    """Parse a serialized grounding string.

    Empty or whitespace-only input is the no-target output. Otherwise the
    text splits on the separator chosen by `expect` and every group must be
    a bracketed integer list: exactly 4 integers for boxes, an even count of
    at least 6 for masks. Strict mode raises ParseError (with byte offsets)
    on any violation; lenient mode drops a trailing unpaired mask integer
    and clamps out-of-range bins, counting each repair in `warnings`.
    """
    if mode not in ("strict", "lenient"):
        raise ValueError(f"unknown mode {mode!r}")
    if expect not in ("boxes", "masks"):
        raise ValueError(f"unknown expectation {expect!r}")
    if text.strip() == "":
        return GroundingOutput.no_target()
    lenient = mode == "lenient"
    sep = MSEP if expect == "masks" else BSEP

    groups: list[list[tuple[int, int]]] = []
    start = 0
    while True:
        cut = text.find(sep, start)
        end = len(text) if cut == -1 else cut
        groups.append(_GroupScanner(text, start, end).scan())
        if cut == -1:
            break
        start = cut + len(sep)

    warnings = 0
    parsed_groups: list[list[int]] = []
    for values in groups:
        ints: list[int] = []
        for v, at in values:
            if 0 <= v < n_bins:
                ints.append(v)
            elif lenient:
                ints.append(min(max(v, 0), n_bins - 1))
                warnings += 1
            else:
                raise ParseError(f"bin out of range: {v} (n_bins={n_bins})", _byte_offset(text, at))
        parsed_groups.append(ints)

    if expect == "boxes":
        for values, ints in zip(groups, parsed_groups):
            if len(ints) != 4:
                raise ParseError(
                    f"box needs exactly 4 coordinates, got {len(ints)}",
                    _byte_offset(text, values[0][1]),
                )
        return GroundingOutput.of_boxes([tuple(g) for g in parsed_groups], warnings=warnings)

    seqs = []
    for values, ints in zip(groups, parsed_groups):
        if len(ints) % 2 != 0:
            if not lenient:
                raise ParseError("odd coordinate count", _byte_offset(text, values[-1][1]))
            ints = ints[:-1]
            warnings += 1
        if len(ints) < 6:
            raise ParseError(
                f"fewer than 3 points in mask sequence ({len(ints) // 2})",
                _byte_offset(text, values[0][1]),
            )
        seqs.append(QuantSeq(tuple(zip(ints[0::2], ints[1::2]))))
    return GroundingOutput.of_masks(seqs, warnings=warnings)
