"""Grounding evaluation metrics and the reconstruction upper-bound harness.

Evaluation reads one sample per JSONL line (see docs/formats.md):

    {"id": ..., "width": W, "height": H, "no_target": false,
     "gt_masks": [{"rle": {...}} | {"polygon": [x0, y0, ...]}],
     "gt_boxes": [[x0, y0, x1, y1], ...],
     "prediction": "serialized grounding string"}     # optional here

Conventions (documented, since the upstream benchmarks leave gaps):

* Pr@t (single-target): the one predicted box must reach IoU >= t; a
  multi-box or no-target prediction fails the sample. IoU == t counts.
* Generalized Pr@t: every GT box matched one-to-one (greedy, IoU
  descending) at IoU >= t with no spurious predictions; a no-target sample
  succeeds iff the prediction is no-target.
* gIoU: per-sample IoU on mask unions; a no-target sample scores 1 when
  predicted no-target, else 0; a targeted sample predicted no-target
  scores 0.
* Zero-denominator rates report 1.0, flagged in the report.
* Predictions that fail to parse (even leniently) score as no-target and
  are counted under parse_failures.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import maskio
from .codec import GroundingOutput, QuantConfig, decode_mask, dequantize, parse_grounding
from .codec import encode_contour, encode_mask
from .errors import ParseError
from .geometry import BBox, BinaryMask, box_iou, mask_iou, mask_union, rasterize_polygon
from .sampling import SamplingConfig

logger = logging.getLogger(__name__)


@dataclass
class CorpusItem:
    """One ground-truth instance for the upper-bound harness.

    `contour` carries the annotation polygon when the source data has one;
    sampling then runs on the true boundary instead of a re-traced
    rasterization (see codec.encode_contour).
    """

    mask: BinaryMask
    contour: np.ndarray | None = None


@dataclass
class GroundTruth:
    no_target: bool = False
    masks: list[BinaryMask] = field(default_factory=list)
    boxes: list[BBox] = field(default_factory=list)


@dataclass
class EvalSample:
    id: str
    width: int
    height: int
    gt: GroundTruth
    pred: GroundingOutput
    pred_parse_failed: bool = False

    @property
    def quant(self) -> QuantConfig:
        return QuantConfig(image_w=self.width, image_h=self.height)


@dataclass
class EvalReport:
    task: str
    sample_count: int
    miou: float | None = None
    giou: float | None = None
    n_acc: float | None = None
    t_acc: float | None = None
    pr_at: dict[float, float] = field(default_factory=dict)
    parse_failures: int = 0
    flags: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        obj = {
            "task": self.task,
            "sample_count": self.sample_count,
            "miou": self.miou,
            "giou": self.giou,
            "n_acc": self.n_acc,
            "t_acc": self.t_acc,
            "pr_at": {f"{t:g}": v for t, v in sorted(self.pr_at.items())},
            "parse_failures": self.parse_failures,
            "flags": self.flags,
        }
        return json.dumps(obj, indent=2, sort_keys=True)


# --- sample construction ------------------------------------------------------


def _gt_mask_from_obj(obj: dict, width: int, height: int) -> BinaryMask:
    if "rle" in obj:
        return maskio.rle_decode(obj["rle"])
    if "polygon" in obj:
        flat = np.asarray(obj["polygon"], dtype=np.float64)
        if flat.size < 6 or flat.size % 2 != 0:
            raise ValueError("polygon needs an even count of >= 6 coordinates")
        return rasterize_polygon(flat.reshape(-1, 2), width, height)
    raise ValueError("ground-truth mask needs an 'rle' or 'polygon' key")


def sample_from_json(
    obj: dict,
    expect: str,
    prediction: str | None = None,
    n_bins: int = 1000,
) -> EvalSample:
    """Build one EvalSample from a decoded JSONL record.

    `prediction` overrides the record's own field (used when predictions
    arrive in a separate line-aligned file). Parsing is lenient; a string
    that still fails scores as no-target and flags the sample.
    """
    width = int(obj["width"])
    height = int(obj["height"])
    gt = GroundTruth(
        no_target=bool(obj.get("no_target", False)),
        masks=[_gt_mask_from_obj(m, width, height) for m in obj.get("gt_masks", [])],
        boxes=[tuple(map(float, b)) for b in obj.get("gt_boxes", [])],
    )
    if gt.no_target and (gt.masks or gt.boxes):
        raise ValueError(f"sample {obj.get('id')!r}: no-target sample carries geometry")
    raw = obj.get("prediction", "") if prediction is None else prediction
    failed = False
    try:
        pred = parse_grounding(raw, mode="lenient", expect=expect, n_bins=n_bins)
    except ParseError:
        pred = GroundingOutput.no_target()
        failed = True
    return EvalSample(
        id=str(obj.get("id", "")),
        width=width,
        height=height,
        gt=gt,
        pred=pred,
        pred_parse_failed=failed,
    )


def read_eval_jsonl(
    path: str | Path,
    expect: str,
    predictions: Sequence[str] | None = None,
    n_bins: int = 1000,
) -> list[EvalSample]:
    samples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno + 1}: malformed JSON ({exc})") from exc
            pred = None
            if predictions is not None:
                if lineno >= len(predictions):
                    raise ValueError(f"missing prediction line {lineno + 1}")
                pred = predictions[lineno]
            samples.append(sample_from_json(obj, expect, prediction=pred, n_bins=n_bins))
    return samples


# --- scoring ------------------------------------------------------------------


def _pred_union_mask(s: EvalSample, n_bins: int = 1000) -> BinaryMask:
    cfg = QuantConfig(image_w=s.width, image_h=s.height, n_bins=n_bins)
    if s.pred.kind != "masks":
        return BinaryMask.zeros(s.width, s.height)
    return mask_union([decode_mask(seq, cfg) for seq in s.pred.masks], s.width, s.height)


def _sample_mask_iou(s: EvalSample, n_bins: int = 1000) -> float:
    gt_union = mask_union(s.gt.masks, s.width, s.height)
    return mask_iou(_pred_union_mask(s, n_bins), gt_union)


def miou(samples: Sequence[EvalSample], n_bins: int = 1000) -> float:
    """Mean per-sample IoU between predicted and ground-truth mask unions."""
    if not samples:
        raise ValueError("no samples")
    scores = [_sample_mask_iou(s, n_bins) for s in samples]
    return float(np.mean(scores))


def giou_nacc_tacc(
    samples: Sequence[EvalSample], n_bins: int = 1000
) -> tuple[float, float, float, list[str]]:
    """Generalized IoU plus no-target / targeted detection accuracies."""
    if not samples:
        raise ValueError("no samples")
    giou_scores = []
    nt_total = nt_hit = tg_total = tg_hit = 0
    for s in samples:
        pred_nt = s.pred.kind == "no_target"
        if s.gt.no_target:
            nt_total += 1
            nt_hit += pred_nt
            giou_scores.append(1.0 if pred_nt else 0.0)
        else:
            tg_total += 1
            tg_hit += not pred_nt
            giou_scores.append(0.0 if pred_nt else _sample_mask_iou(s, n_bins))
    flags = []
    if nt_total == 0:
        flags.append("n_acc has zero denominator; reported as 1.0")
    if tg_total == 0:
        flags.append("t_acc has zero denominator; reported as 1.0")
    n_acc = nt_hit / nt_total if nt_total else 1.0
    t_acc = tg_hit / tg_total if tg_total else 1.0
    return float(np.mean(giou_scores)), n_acc, t_acc, flags


def _pred_boxes_px(s: EvalSample, n_bins: int = 1000) -> list[BBox]:
    cfg = QuantConfig(image_w=s.width, image_h=s.height, n_bins=n_bins)
    out = []
    for qb in s.pred.boxes:
        x0, y0 = dequantize((qb[0], qb[1]), cfg)
        x1, y1 = dequantize((qb[2], qb[3]), cfg)
        # model output may order corners arbitrarily; normalize
        out.append((min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1)))
    return out


def precision_at(
    samples: Sequence[EvalSample],
    thresholds: Sequence[float] = (0.5,),
    n_bins: int = 1000,
) -> dict[float, float]:
    """Single-target box precision: exactly one predicted box, IoU >= t."""
    if not samples:
        raise ValueError("no samples")
    ious = []
    for s in samples:
        if s.pred.kind != "boxes" or len(s.pred.boxes) != 1 or not s.gt.boxes:
            ious.append(-1.0)  # counted as a miss at every threshold
            continue
        ious.append(box_iou(_pred_boxes_px(s, n_bins)[0], s.gt.boxes[0]))
    arr = np.asarray(ious)
    return {float(t): float(np.mean(arr >= t)) for t in thresholds}


def _greedy_match_count(pred: list[BBox], gt: list[BBox], threshold: float) -> int:
    pairs = sorted(
        ((box_iou(p, g), pi, gi) for pi, p in enumerate(pred) for gi, g in enumerate(gt)),
        key=lambda x: (-x[0], x[1], x[2]),
    )
    used_p: set[int] = set()
    used_g: set[int] = set()
    matched = 0
    for iou, pi, gi in pairs:
        if iou < threshold:
            break
        if pi in used_p or gi in used_g:
            continue
        used_p.add(pi)
        used_g.add(gi)
        matched += 1
    return matched


def grec_precision(
    samples: Sequence[EvalSample],
    threshold: float = 0.5,
    n_bins: int = 1000,
) -> float:
    """Generalized (multi-target) precision; see module docstring."""
    if not samples:
        raise ValueError("no samples")
    hits = 0
    for s in samples:
        pred_nt = s.pred.kind == "no_target"
        if s.gt.no_target:
            hits += pred_nt
            continue
        if pred_nt or s.pred.kind != "boxes":
            continue
        pred = _pred_boxes_px(s, n_bins)
        if len(pred) != len(s.gt.boxes):
            continue
        hits += _greedy_match_count(pred, s.gt.boxes, threshold) == len(s.gt.boxes)
    return hits / len(samples)


def evaluate(
    samples: Sequence[EvalSample],
    task: str,
    thresholds: Sequence[float] = (0.5,),
    n_bins: int = 1000,
) -> EvalReport:
    """Task-appropriate metric bundle, matching the benchmark conventions."""
    if task not in ("rec", "res", "grec", "gres"):
        raise ValueError(f"unknown task {task!r}")
    report = EvalReport(task=task, sample_count=len(samples))
    report.parse_failures = sum(s.pred_parse_failed for s in samples)
    if report.parse_failures:
        report.flags.append(f"{report.parse_failures} predictions failed to parse; scored as no-target")
    if task == "res":
        report.miou = miou(samples, n_bins)
    elif task == "rec":
        report.pr_at = precision_at(samples, thresholds, n_bins)
    elif task == "gres":
        report.giou, report.n_acc, report.t_acc, flags = giou_nacc_tacc(samples, n_bins)
        report.flags.extend(flags)
    else:  # grec
        report.pr_at = {float(t): grec_precision(samples, t, n_bins) for t in thresholds}
        nt = [s for s in samples if s.gt.no_target]
        if nt:
            report.n_acc = sum(s.pred.kind == "no_target" for s in nt) / len(nt)
        else:
            report.n_acc = 1.0
            report.flags.append("n_acc has zero denominator; reported as 1.0")
    return report


# --- reconstruction upper bound -----------------------------------------------


def _upper_bound_worker(args) -> list[float]:
    arr, ring, n_values, method, n_bins, m_dense = args
    mask = BinaryMask(arr)
    cfg = QuantConfig(image_w=mask.width, image_h=mask.height, n_bins=n_bins)
    out = []
    for n in n_values:
        scfg = SamplingConfig(m_dense=max(m_dense, n), n_out=n)
        if ring is not None:
            seq = encode_contour(ring, cfg, scfg, method)
        else:
            seq = encode_mask(mask, cfg, scfg, method)
        out.append(mask_iou(decode_mask(seq, cfg), mask))
    return out


def upper_bound_eval(
    gt_masks: Iterable[BinaryMask | CorpusItem],
    n_values: Sequence[int],
    method: str = "adaptive",
    n_bins: int = 1000,
    m_dense: int = 400,
    jobs: int = 1,
) -> dict[int, float]:
    """Mean encode->decode IoU per point count: the information-loss ceiling
    the sequence representation imposes on any downstream model.

    Masks without foreground are skipped with a warning. Aggregation runs
    in input order, so results are identical for any worker count.
    """
    n_values = [int(n) for n in n_values]
    kept = []
    skipped = 0
    for item in gt_masks:
        if isinstance(item, BinaryMask):
            item = CorpusItem(mask=item)
        if item.mask.array.any():
            kept.append((item.mask.array, item.contour))
        else:
            skipped += 1
    if skipped:
        logger.warning("upper_bound_eval: skipped %d masks with no foreground", skipped)
    if not kept:
        raise ValueError("no masks with foreground")
    work = [(arr, ring, n_values, method, n_bins, m_dense) for arr, ring in kept]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_upper_bound_worker, work, chunksize=8))
    else:
        rows = [_upper_bound_worker(w) for w in work]
    mat = np.asarray(rows)  # (masks, n_values), input order
    means = mat.mean(axis=0)
    return {n: float(v) for n, v in zip(n_values, means)}
