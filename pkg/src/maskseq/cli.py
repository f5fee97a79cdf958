"""Command-line surface.

Exit codes: 0 success, 2 parse/IO error, 3 empty mask or no-target input.
stdout carries machine-readable output (sequence strings, CSV, JSON);
diagnostics go to stderr. MASKSEQ_LOG sets the log level.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__, maskio, svg
from .codec import (
    GroundingOutput,
    QuantConfig,
    decode_mask,
    dequantize_seq,
    encode_mask,
    parse_grounding,
    serialize,
)
from .errors import EmptyMaskError, ParseError
from .geometry import BinaryMask
from .instructgen import build_attcoseg, convert_coco, validate_splits
from .metrics import evaluate, read_eval_jsonl, upper_bound_eval
from .sampling import SamplingConfig

EX_OK = 0
EX_ERROR = 2
EX_EMPTY = 3

logger = logging.getLogger("maskseq")


def _sampling_config(args) -> SamplingConfig:
    return SamplingConfig(m_dense=args.dense, n_out=args.points)


def _read_seq_arg(value: str) -> str:
    """Sequence argument: literal string, or @path to read it from a file."""
    if value.startswith("@"):
        return Path(value[1:]).read_text(encoding="utf-8").strip("\n")
    return value


def _load_corpus(path: Path) -> list:
    """Corpus = directory of mask PNGs, or a JSONL whose lines carry one of
    {'rle': ...}, {'mask_png': path}, or {'polygon': [...], 'width', 'height'}.
    Polygon entries keep the annotation ring as the sampling contour.
    """
    import numpy as np

    from .geometry import rasterize_polygon
    from .metrics import CorpusItem

    items = []
    if path.is_dir():
        for p in sorted(path.glob("*.png")):
            items.append(CorpusItem(mask=maskio.read_png(p)))
    else:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                obj = json.loads(line)
                if "rle" in obj:
                    items.append(CorpusItem(mask=maskio.rle_decode(obj["rle"])))
                elif "mask_png" in obj:
                    items.append(CorpusItem(mask=maskio.read_png(path.parent / obj["mask_png"])))
                elif "polygon" in obj:
                    ring = np.asarray(obj["polygon"], dtype=np.float64).reshape(-1, 2)
                    mask = rasterize_polygon(ring, int(obj["width"]), int(obj["height"]))
                    items.append(CorpusItem(mask=mask, contour=ring))
                else:
                    raise ValueError(
                        f"{path}:{lineno}: corpus line needs 'rle', 'mask_png', or 'polygon'"
                    )
    if not items:
        raise ValueError(f"no masks found in corpus {path}")
    return items


def cmd_encode(args) -> int:
    mask = maskio.read_mask(args.mask_file)
    cfg = QuantConfig(image_w=mask.width, image_h=mask.height, n_bins=args.n_bins)
    seq = encode_mask(mask, cfg, _sampling_config(args), args.method)
    text = serialize(GroundingOutput.of_masks([seq]))
    if args.format == "json":
        text = json.dumps({"sequence": text, "width": mask.width, "height": mask.height})
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return EX_OK


def cmd_decode(args) -> int:
    text = _read_seq_arg(args.sequence)
    out = parse_grounding(text, mode="lenient" if args.lenient else "strict",
                          expect="masks", n_bins=args.n_bins)
    if out.kind == "no_target":
        print("no-target input: nothing to decode", file=sys.stderr)
        return EX_EMPTY
    cfg = QuantConfig(image_w=args.width, image_h=args.height, n_bins=args.n_bins)
    merged = None
    for seq in out.masks:
        m = decode_mask(seq, cfg)
        merged = m.array if merged is None else (merged | m.array)
    maskio.write_mask(BinaryMask(merged), args.out)
    return EX_OK


def cmd_upper_bound(args) -> int:
    masks = _load_corpus(Path(args.corpus))
    n_values = [int(v) for v in args.n_list.split(",")]
    methods = [m.strip() for m in args.methods.split(",")]
    rows = []  # fixed column order: n, method, miou
    series: dict[str, list[tuple[float, float]]] = {}
    for method in methods:
        result = upper_bound_eval(
            masks, n_values, method=method, n_bins=args.n_bins,
            m_dense=args.dense, jobs=args.jobs,
        )
        series[method] = [(n, result[n]) for n in n_values]
        for n in n_values:
            rows.append((n, method, result[n]))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "method", "miou"])
    for n, method, value in rows:
        writer.writerow([n, method, f"{value:.6f}"])
    csv_text = buf.getvalue()
    if args.csv:
        Path(args.csv).write_text(csv_text, encoding="utf-8")
    elif args.format == "json":
        print(json.dumps([{"n": n, "method": m, "miou": v} for n, m, v in rows]))
    else:
        sys.stdout.write(csv_text)
    if args.svg:
        chart = svg.line_chart(
            {k: [(x, y * 100) for x, y in v] for k, v in series.items()},
            title="Reconstruction upper bound",
            xlabel="sampled points",
            ylabel="mIoU (%)",
        )
        Path(args.svg).write_text(chart, encoding="utf-8")
    return EX_OK


def cmd_eval(args) -> int:
    expect = "boxes" if args.task in ("rec", "grec") else "masks"
    predictions = None
    if args.pred_file:
        predictions = Path(args.pred_file).read_text(encoding="utf-8").split("\n")
        if predictions and predictions[-1] == "":
            predictions.pop()
    samples = read_eval_jsonl(args.gt_jsonl, expect, predictions=predictions, n_bins=args.n_bins)
    report = evaluate(samples, args.task, thresholds=[float(t) for t in args.thresholds.split(",")],
                      n_bins=args.n_bins)
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["metric", "value"])
        for name in ("miou", "giou", "n_acc", "t_acc"):
            value = getattr(report, name)
            if value is not None:
                writer.writerow([name, f"{value:.6f}"])
        for t, v in sorted(report.pr_at.items()):
            writer.writerow([f"pr@{t:g}", f"{v:.6f}"])
        writer.writerow(["sample_count", report.sample_count])
        sys.stdout.write(buf.getvalue())
    else:
        print(report.to_json())
    return EX_OK


def cmd_convert(args) -> int:
    stats = convert_coco(
        args.instances,
        args.refs,
        args.task,
        args.out,
        n_bins=args.n_bins,
        scfg=_sampling_config(args),
        method=args.method,
        seed=args.seed,
        jobs=args.jobs,
    )
    leaked = validate_splits([args.out])
    if leaked:
        print(f"split leakage: {len(leaked)} image(s) in multiple splits", file=sys.stderr)
        for img in leaked[:10]:
            print(f"  {img}", file=sys.stderr)
    print(stats.to_json())
    return EX_OK


def cmd_attcoseg(args) -> int:
    stats = build_attcoseg(
        args.pairs,
        args.negatives,
        args.k,
        args.seed,
        args.out,
        n_bins=args.n_bins,
        scfg=_sampling_config(args),
        method=args.method,
    )
    print(stats.to_json())
    return EX_OK


def cmd_visualize(args) -> int:
    text = _read_seq_arg(args.sequence)
    out = parse_grounding(text, mode="lenient" if args.lenient else "strict",
                          expect=args.expect, n_bins=args.n_bins)
    width, height = args.width, args.height
    if width is None or height is None:
        img_path = Path(args.image)
        if img_path.suffix.lower() == ".png" and img_path.exists():
            from PIL import Image

            with Image.open(img_path) as im:
                width, height = im.size
        else:
            print("need --width and --height when the image is not a local PNG", file=sys.stderr)
            return EX_ERROR
    cfg = QuantConfig(image_w=width, image_h=height, n_bins=args.n_bins)
    polygons = []
    boxes = []
    if out.kind == "masks":
        for seq in out.masks:
            polygons.append([tuple(p) for p in dequantize_seq(seq, cfg)])
    elif out.kind == "boxes":
        for qb in out.boxes:
            x0 = qb[0] * width / args.n_bins
            y0 = qb[1] * height / args.n_bins
            x1 = qb[2] * width / args.n_bins
            y1 = qb[3] * height / args.n_bins
            boxes.append((x0, y0, x1, y1))
    doc = svg.overlay_svg(args.image, width, height, polygons, boxes,
                          no_target=out.kind == "no_target")
    Path(args.out).write_text(doc, encoding="utf-8")
    return EX_OK


def cmd_parse(args) -> int:
    text = _read_seq_arg(args.sequence)
    out = parse_grounding(text, mode="lenient" if args.lenient else "strict",
                          expect=args.expect, n_bins=args.n_bins)
    obj = {
        "kind": out.kind,
        "boxes": [list(b) for b in out.boxes],
        "masks": [[list(xy) for xy in m.coords] for m in out.masks],
        "warnings": out.warnings,
    }
    print(json.dumps(obj))
    return EX_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maskseq", description=__doc__)
    parser.add_argument("--version", action="version", version=f"maskseq {__version__}")
    parser.add_argument("--seed", type=int, default=0, help="global RNG seed")
    parser.add_argument("--n-bins", type=int, default=1000, help="quantization bins")
    parser.add_argument("--points", type=int, default=32, help="points per mask sequence")
    parser.add_argument("--method", choices=("uniform", "adaptive"), default="adaptive")
    parser.add_argument("--dense", type=int, default=400, help="dense resample count")
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="worker processes for corpus commands")
    parser.add_argument("--format", choices=("json", "csv"), default=None,
                        help="stdout format for reporting commands (commands whose"
                             " artifact is a file ignore this)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="mask file (PNG or RLE JSON) -> sequence string")
    p.add_argument("mask_file")
    p.add_argument("--out", help="write the sequence here instead of stdout")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="sequence string -> mask file")
    p.add_argument("sequence", help="serialized sequence, or @file")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--out", required=True, help="output mask (.png or .json RLE)")
    p.add_argument("--lenient", action="store_true")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("upper-bound", help="corpus reconstruction ceiling (CSV + SVG)")
    p.add_argument("corpus", help="directory of PNGs, or JSONL with {'rle': ...} lines")
    p.add_argument("--n-list", default="8,12,16,24,32")
    p.add_argument("--methods", default="adaptive,uniform")
    p.add_argument("--csv", help="write CSV here (default: stdout)")
    p.add_argument("--svg", help="also write an SVG line chart")
    p.set_defaults(func=cmd_upper_bound)

    p = sub.add_parser("eval", help="grounding metrics report (JSON to stdout)")
    p.add_argument("gt_jsonl")
    p.add_argument("pred_file", nargs="?", default=None,
                   help="line-aligned predictions; omitted -> use the JSONL's own field")
    p.add_argument("--task", choices=("rec", "res", "grec", "gres"), required=True)
    p.add_argument("--thresholds", default="0.5")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("convert", help="COCO + refs -> instruction records JSONL")
    p.add_argument("--task", choices=("rec", "res", "grec", "gres"), required=True)
    p.add_argument("--instances", required=True)
    p.add_argument("--refs", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("attcoseg", help="positive pairs + negatives -> AttCoSeg records")
    p.add_argument("--pairs", required=True)
    p.add_argument("--negatives", required=True)
    p.add_argument("--k", type=int, default=4, help="images per group")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_attcoseg)

    p = sub.add_parser("visualize", help="overlay a parsed sequence on an image as SVG")
    p.add_argument("image", help="image reference (href in the SVG)")
    p.add_argument("sequence", help="serialized output, or @file")
    p.add_argument("--out", required=True)
    p.add_argument("--expect", choices=("masks", "boxes"), default="masks")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--lenient", action="store_true")
    p.set_defaults(func=cmd_visualize)

    p = sub.add_parser("parse", help="parse a grounding string to JSON")
    p.add_argument("sequence", help="serialized output, or @file")
    p.add_argument("--expect", choices=("masks", "boxes"), default="masks")
    p.add_argument("--lenient", action="store_true")
    p.set_defaults(func=cmd_parse)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("MASKSEQ_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EX_ERROR
    except EmptyMaskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_EMPTY
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_ERROR


if __name__ == "__main__":
    sys.exit(main())
