"""Instruction-template engine and dataset converters.

Records follow the coinit-record/v1 JSONL schema (docs/formats.md): one
instruction-tuning sample per line with a task tag, image references, the
rendered instruction, and a serialized target. Grounding targets use the
codec wire grammar, so every emitted target parses back in strict mode.

Template placeholders: <image> markers are left intact for downstream
splicing (one per input image); <expr>, <question> and <objs> are
substituted at render time; <bsep> / <msep> appear literally where an
instruction tells the model how to separate multiple outputs.

Conversion is reproducible: template choice and negative sampling derive
their RNG seeds from (global seed, record id) via SHA-256, so output bytes
are identical across runs and across worker counts.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import maskio
from .codec import GroundingOutput, QuantConfig, QuantSeq, encode_contour, encode_mask, serialize
from .errors import EmptyMaskError
from .geometry import BinaryMask, extract_contours, largest_contour, rasterize_polygon
from .sampling import SamplingConfig

logger = logging.getLogger(__name__)

RECORD_SCHEMA = "coinit-record/v1"

TASKS = (
    "caption",
    "vqa",
    "rec",
    "res",
    "grec",
    "gres",
    "reg",
    "nlvr",
    "spot_caption",
    "coseg",
    "attcoseg",
    "pqa",
    "bqa",
)

# substitutable bindings per task; <image>/<bsep>/<msep> are structural
_ALLOWED_BINDINGS = {
    "caption": set(),
    "vqa": {"question"},
    "rec": {"expr"},
    "res": {"expr"},
    "grec": {"expr"},
    "gres": {"expr"},
    "reg": {"objs"},
    "nlvr": {"question"},
    "spot_caption": set(),
    "coseg": set(),
    "attcoseg": set(),
    "pqa": {"question", "objs"},
    "bqa": {"question", "objs"},
}

_STRUCTURAL = {"image", "bsep", "msep"}
_PLACEHOLDER_RE = re.compile(r"<([a-z_]+)>")

_MASK_FORMAT = "[x0, y0, x1, y1, ..., x31, y31]"
_BOX_FORMAT = "[x0, y0, x1, y1]"

DEFAULT_TEMPLATES: dict[str, list[str]] = {
    "caption": [
        "Describe the image <image> in a sentence or two.",
        "Give a short caption for the picture <image>.",
        "Summarize what the photo <image> shows.",
    ],
    "vqa": [
        "Answer briefly using the image <image>: <question>",
        "Based on the picture <image>, give a short answer to <question>",
        "Look at <image> and respond concisely to the question: <question>",
    ],
    "rec": [
        f"Locate the object that <expr> refers to in <image>. There is exactly one match."
        f" Reply with {_BOX_FORMAT} for the top-left and bottom-right corners of its box.",
        f"Find the single object described by <expr> in <image> and return its bounding"
        f" box as {_BOX_FORMAT} (top-left corner, then bottom-right corner).",
    ],
    "res": [
        f"Segment the object that <expr> refers to in <image>. There is exactly one"
        f" match. Reply with the coordinates of 32 points along its outline in"
        f" {_MASK_FORMAT} form.",
        f"Find where <expr> is in <image> and trace its boundary: give 32 points on"
        f" the object's outline as {_MASK_FORMAT}.",
    ],
    "grec": [
        f"Detect every object matching <expr> in <image>. If nothing matches, reply"
        f" with an empty string. Otherwise give each bounding box as {_BOX_FORMAT}"
        f" (top-left and bottom-right corners), separating multiple boxes with <bsep>.",
        f"Find all boxes for <expr> in <image>. Return an empty string when there is"
        f" no match; otherwise list each box as {_BOX_FORMAT} and join several boxes"
        f" with <bsep>.",
    ],
    "gres": [
        f"Segment every object matching <expr> in <image>. If nothing matches, reply"
        f" with an empty string. Otherwise give 32 outline points per object in"
        f" {_MASK_FORMAT} form, separating multiple masks with <msep>.",
        f"Find all regions described by <expr> in <image>. Return an empty string when"
        f" no object matches; otherwise output each mask as 32 boundary points"
        f" {_MASK_FORMAT}, with <msep> between masks.",
    ],
    "reg": [
        "Write a distinguishing description for the region <objs> in <image>.",
        "What makes the area <objs> of <image> different from the rest? Describe it uniquely.",
    ],
    "nlvr": [
        "Given the left image <image> and the right image <image>, is the statement"
        " <question> True or False?",
        "Compare the left image <image> with the right image <image> and answer True"
        " or False: <question>",
    ],
    "spot_caption": [
        f"Describe the scene in <image> and attach a box {_BOX_FORMAT} (top-left and"
        f" bottom-right corners) to every object you mention.",
        f"Caption <image> in detail, giving each mentioned object's position as {_BOX_FORMAT}.",
    ],
    "coseg": [
        f"The input images <image> share exactly one common object. Segment it in each"
        f" image, giving 32 outline points per mask in {_MASK_FORMAT} form, with <msep>"
        f" between masks.",
        f"Find the one object present in all input images <image> and output its mask"
        f" in each, as {_MASK_FORMAT}; separate the masks with <msep>.",
    ],
    "attcoseg": [
        f"Two of the input images <image> contain objects whose attributes (shape,"
        f" color, size, position) match. Say which two images they are, then segment"
        f" the shared object in both, giving each mask as {_MASK_FORMAT} with <msep>"
        f" between the two.",
        f"Among the input images <image>, find the pair with an attribute-matched"
        f" common object (shape, color, size, position). Identify the pair and output"
        f" both object masks in {_MASK_FORMAT} form, separated by <msep>.",
    ],
    "pqa": [
        "In <image>, the point <objs> marks a location. Answer the question about it: <question>",
        "Consider the spot <objs> in <image> and answer briefly: <question>",
    ],
    "bqa": [
        "In <image>, the region <objs> is a bounding box. Answer the question about it: <question>",
        "Using the box <objs> in <image>, give a short answer to <question>",
    ],
}


class TemplateRegistry:
    """Versioned, fixed set of instruction templates per task."""

    version = "coinit-templates/v1"

    def __init__(self, templates: dict[str, list[str]] | None = None):
        self._templates: dict[str, list[str]] = {}
        for task, texts in (templates or DEFAULT_TEMPLATES).items():
            self.register(task, texts)

    def register(self, task: str, texts: list[str]) -> None:
        if task not in TASKS:
            raise ValueError(f"unknown task {task!r}")
        allowed = _ALLOWED_BINDINGS[task] | _STRUCTURAL
        for text in texts:
            names = set(_PLACEHOLDER_RE.findall(text))
            bad = names - allowed
            if bad:
                raise ValueError(f"template for {task!r} uses illegal placeholder(s): {sorted(bad)}")
            if "<image>" not in text:
                raise ValueError(f"template for {task!r} lacks an <image> marker")
        self._templates.setdefault(task, []).extend(texts)

    def templates(self, task: str) -> list[str]:
        if task not in self._templates:
            raise ValueError(f"no templates registered for task {task!r}")
        return list(self._templates[task])

    def render(self, task: str, bindings: dict[str, str], rng_seed: int) -> str:
        """Seeded-uniform template choice with full substitution of every
        non-structural placeholder; <image> markers stay in place.
        """
        texts = self.templates(task)
        rng = random.Random(rng_seed)
        text = texts[rng.randrange(len(texts))]
        for name in sorted(set(_PLACEHOLDER_RE.findall(text)) - _STRUCTURAL):
            if name not in bindings:
                raise ValueError(f"missing binding for placeholder <{name}>")
            text = text.replace(f"<{name}>", bindings[name])
        return text


_DEFAULT_REGISTRY = TemplateRegistry()


def register_templates(task: str, texts: list[str]) -> None:
    _DEFAULT_REGISTRY.register(task, texts)


def render(task: str, bindings: dict[str, str], rng_seed: int) -> str:
    return _DEFAULT_REGISTRY.render(task, bindings, rng_seed)


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from arbitrary parts (never Python's salted hash)."""
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


# --- conversion ---------------------------------------------------------------


@dataclass
class ConversionStats:
    records: int = 0
    skipped_missing_ann: int = 0
    skipped_empty_mask: int = 0
    multipart_warnings: int = 0
    hole_warnings: int = 0
    by_split: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "records": self.records,
                "skipped_missing_ann": self.skipped_missing_ann,
                "skipped_empty_mask": self.skipped_empty_mask,
                "multipart_warnings": self.multipart_warnings,
                "hole_warnings": self.hole_warnings,
                "by_split": dict(sorted(self.by_split.items())),
            },
            indent=2,
            sort_keys=True,
        )


def ann_to_mask(ann: dict, width: int, height: int) -> BinaryMask:
    """COCO segmentation (polygon list or uncompressed RLE) to a mask."""
    seg = ann["segmentation"]
    if isinstance(seg, dict):
        return maskio.rle_decode(seg)
    acc = np.zeros((height, width), dtype=bool)
    for flat in seg:
        pts = np.asarray(flat, dtype=np.float64).reshape(-1, 2)
        acc |= rasterize_polygon(pts, width, height).array
    return BinaryMask(acc)


def ann_largest_polygon(ann: dict) -> np.ndarray | None:
    """Largest polygon part of an annotation, or None for RLE segmentations.

    Polygon annotations carry the object's true (continuous) contour, which
    samples far better than a re-traced rasterization; see codec.encode_contour.
    """
    seg = ann["segmentation"]
    if isinstance(seg, dict):
        return None
    best, best_area = None, -1.0
    for flat in seg:
        pts = np.asarray(flat, dtype=np.float64).reshape(-1, 2)
        if pts.shape[0] < 3:
            continue
        x, y = pts[:, 0], pts[:, 1]
        area = abs(0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))
        if area > best_area:
            best, best_area = pts, area
    return best


def _mask_shape_warnings(mask: BinaryMask) -> tuple[int, int]:
    """(multipart, holes) indicator flags for one instance mask."""
    contours = extract_contours(mask)
    multipart = int(len(contours) > 1)
    ring = largest_contour(contours)
    filled = rasterize_polygon(ring.points, mask.width, mask.height)
    holes = int(bool((filled.array & ~mask.array).any()))
    return multipart, holes


def _encode_target_masks(
    anns: list[dict],
    masks: list[BinaryMask],
    cfg: QuantConfig,
    scfg: SamplingConfig,
    method: str,
) -> tuple[str, int, int]:
    seqs = []
    multipart = holes = 0
    for ann, m in zip(anns, masks):
        mp, hl = _mask_shape_warnings(m)
        multipart += mp
        holes += hl
        poly = ann_largest_polygon(ann)
        if poly is not None:
            seqs.append(encode_contour(poly, cfg, scfg, method))
        else:
            seqs.append(encode_mask(m, cfg, scfg, method))
    return serialize(GroundingOutput.of_masks(seqs)), multipart, holes


def _box_target(anns: list[dict], cfg: QuantConfig) -> str:
    from .codec import quantize

    boxes = []
    for ann in anns:
        x, y, w, h = ann["bbox"]
        q0 = quantize((x, y), cfg)
        q1 = quantize((x + w, y + h), cfg)
        boxes.append((q0[0], q0[1], q1[0], q1[1]))
    return serialize(GroundingOutput.of_boxes(boxes))


def _convert_one(args) -> tuple[str | None, dict]:
    """Worker: one referring expression -> (jsonl line | None, stat deltas)."""
    (ref, image, anns, task, n_bins, scfg_tuple, method, seed, source) = args
    stats = {"skipped_missing_ann": 0, "skipped_empty_mask": 0, "multipart_warnings": 0, "hole_warnings": 0}
    scfg = SamplingConfig(*scfg_tuple)
    ref_id = ref["ref_id"]
    ann_ids = ref["ann_ids"]
    if anns is None:
        stats["skipped_missing_ann"] = 1
        return None, stats
    cfg = QuantConfig(image_w=image["width"], image_h=image["height"], n_bins=n_bins)
    single_target = task in ("rec", "res")
    if single_target and len(anns) != 1:
        stats["skipped_missing_ann"] = 1
        return None, stats
    if task in ("res", "gres"):
        if not anns:
            target = ""
        else:
            masks = [ann_to_mask(a, image["width"], image["height"]) for a in anns]
            if any(not m.array.any() for m in masks):
                stats["skipped_empty_mask"] = 1
                return None, stats
            try:
                target, mp, hl = _encode_target_masks(anns, masks, cfg, scfg, method)
            except EmptyMaskError:
                stats["skipped_empty_mask"] = 1
                return None, stats
            stats["multipart_warnings"] = mp
            stats["hole_warnings"] = hl
    else:  # rec / grec
        target = _box_target(anns, cfg) if anns else ""
    instruction = _DEFAULT_REGISTRY.render(task, {"expr": ref["expression"]}, derive_seed(seed, ref_id))
    record = {
        "schema": RECORD_SCHEMA,
        "id": f"{source}-{task}-{ref_id}",
        "task": task,
        "images": [image["file_name"]],
        "instruction": instruction,
        "target": target,
        "meta": {
            "source": source,
            "image_id": image["id"],
            "ann_ids": ann_ids,
            "split": ref.get("split", "train"),
        },
    }
    return json.dumps(record), stats


def _normalize_ref(obj: dict, lineno: int) -> dict:
    try:
        ann_ids = obj["ann_ids"] if "ann_ids" in obj else ([obj["ann_id"]] if obj.get("ann_id") is not None else [])
        return {
            "ref_id": obj["ref_id"],
            "image_id": obj["image_id"],
            "ann_ids": list(ann_ids),
            "expression": obj["expression"],
            "split": obj.get("split", "train"),
        }
    except KeyError as exc:
        raise ValueError(f"refs line {lineno}: missing key {exc}") from exc


def convert_coco(
    instances_path: str | Path,
    refs_path: str | Path,
    task: str,
    out_path: str | Path,
    n_bins: int = 1000,
    scfg: SamplingConfig | None = None,
    method: str = "adaptive",
    seed: int = 0,
    jobs: int = 1,
) -> ConversionStats:
    """COCO instances + referring expressions -> instruction records.

    One record per referring expression; targets go through the full
    encode pipeline. Skips (missing/empty annotations) and shape warnings
    (multi-part instances, dropped holes) are counted in the stats.
    """
    if task not in ("rec", "res", "grec", "gres"):
        raise ValueError(f"unknown conversion task {task!r}")
    scfg = scfg or SamplingConfig()
    with open(instances_path, encoding="utf-8") as fh:
        try:
            coco = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{instances_path}: malformed JSON at offset {exc.pos}") from exc
    images = {img["id"]: img for img in coco["images"]}
    anns = {ann["id"]: ann for ann in coco["annotations"]}
    source = Path(instances_path).stem

    refs = []
    with open(refs_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{refs_path}:{lineno}: malformed JSON ({exc})") from exc
            refs.append(_normalize_ref(obj, lineno))

    work = []
    for ref in refs:
        image = images.get(ref["image_id"])
        ref_anns: list[dict] | None = []
        if image is None:
            ref_anns = None
        else:
            for ann_id in ref["ann_ids"]:
                ann = anns.get(ann_id)
                if ann is None:
                    ref_anns = None
                    break
                ref_anns.append(ann)
        work.append((ref, image, ref_anns, task, n_bins,
                     (scfg.m_dense, scfg.n_out, scfg.theta_eps), method, seed, source))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_convert_one, work, chunksize=16))
    else:
        results = [_convert_one(w) for w in work]

    stats = ConversionStats()
    with open(out_path, "w", encoding="utf-8") as out:
        for (line, deltas), ref in zip(results, refs):
            stats.skipped_missing_ann += deltas["skipped_missing_ann"]
            stats.skipped_empty_mask += deltas["skipped_empty_mask"]
            stats.multipart_warnings += deltas["multipart_warnings"]
            stats.hole_warnings += deltas["hole_warnings"]
            if line is not None:
                out.write(line + "\n")
                stats.records += 1
                split = ref["split"]
                stats.by_split[split] = stats.by_split.get(split, 0) + 1
    if stats.multipart_warnings or stats.hole_warnings:
        logger.warning(
            "conversion dropped detail: %d multi-part instances (largest part kept), %d with holes (filled)",
            stats.multipart_warnings,
            stats.hole_warnings,
        )
    return stats


# --- AttCoSeg builder ----------------------------------------------------------


@dataclass
class AttCoSegGroup:
    images: list[str]
    positive_indices: tuple[int, int]
    targets: tuple[QuantSeq, QuantSeq]


def _positive_mask(entry: dict) -> BinaryMask:
    if "rle" in entry:
        return maskio.rle_decode(entry["rle"])
    if "polygon" in entry:
        pts = np.asarray(entry["polygon"], dtype=np.float64).reshape(-1, 2)
        return rasterize_polygon(pts, int(entry["width"]), int(entry["height"]))
    raise ValueError("positive entry needs an 'rle' or 'polygon' mask")


def build_attcoseg(
    pairs_path: str | Path,
    negatives_path: str | Path,
    k_images: int,
    rng_seed: int,
    out_path: str | Path,
    n_bins: int = 1000,
    scfg: SamplingConfig | None = None,
    method: str = "adaptive",
) -> ConversionStats:
    """Attribute-matched positive pairs + negative pool -> multi-image records.

    Per pair: draw k_images - 2 negatives without replacement (seeded per
    pair), shuffle the group, and emit a record whose target names the two
    positive positions and carries both encoded masks. k_images == 2 is the
    degenerate no-negative group.
    """
    if k_images < 2:
        raise ValueError("k_images must be >= 2")
    scfg = scfg or SamplingConfig()
    pool: list[str] = []
    with open(negatives_path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                pool.append(json.loads(line)["image"])
    if len(pool) < k_images - 2:
        raise ValueError(f"negative pool has {len(pool)} images; need {k_images - 2}")

    stats = ConversionStats()
    with open(pairs_path, encoding="utf-8") as fh, open(out_path, "w", encoding="utf-8") as out:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            pair = json.loads(line)
            positives = pair["positives"]
            if len(positives) != 2:
                raise ValueError(f"{pairs_path}:{lineno}: pair needs exactly 2 positives")
            pair_id = pair["id"]
            rng = random.Random(derive_seed(rng_seed, pair_id))
            negatives = rng.sample(pool, k_images - 2)
            entries = [(p["image"], p) for p in positives] + [(n, None) for n in negatives]
            rng.shuffle(entries)
            images = [name for name, _ in entries]
            if len(set(images)) != len(images):
                raise ValueError(f"{pairs_path}:{lineno}: duplicate image in group")
            pos_idx = tuple(i for i, (_, p) in enumerate(entries) if p is not None)
            seqs = []
            for i in pos_idx:
                mask = _positive_mask(entries[i][1])
                cfg = QuantConfig(image_w=mask.width, image_h=mask.height, n_bins=n_bins)
                seqs.append(encode_mask(mask, cfg, scfg, method))
            target = (
                f"images {pos_idx[0]} and {pos_idx[1]}: "
                + serialize(GroundingOutput.of_masks(seqs))
            )
            instruction = _DEFAULT_REGISTRY.render("attcoseg", {}, derive_seed(rng_seed, pair_id, "tpl"))
            instruction = instruction.replace("<image>", " ".join(["<image>"] * k_images))
            record = {
                "schema": RECORD_SCHEMA,
                "id": f"attcoseg-{pair_id}",
                "task": "attcoseg",
                "images": images,
                "instruction": instruction,
                "target": target,
                "meta": {
                    "source": "attcoseg",
                    "pair_id": pair_id,
                    "positive_indices": list(pos_idx),
                    "split": pair.get("split", "train"),
                },
            }
            out.write(json.dumps(record) + "\n")
            stats.records += 1
            split = pair.get("split", "train")
            stats.by_split[split] = stats.by_split.get(split, 0) + 1
    return stats


ATTCOSEG_TARGET_RE = re.compile(r"^images (\d+) and (\d+): (.*)$", re.DOTALL)


def validate_splits(paths: list[str | Path]) -> list[str]:
    """Image ids appearing under more than one split across the given
    record files (train/val leakage check). Empty list = clean.
    """
    seen: dict[str, set[str]] = {}
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                split = rec.get("meta", {}).get("split", "train")
                for img in rec.get("images", []):
                    seen.setdefault(img, set()).add(split)
    return sorted(img for img, splits in seen.items() if len(splits) > 1)
