import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from maskseq import BinaryMask, GroundingOutput, QuantSeq, mask_iou, serialize
from maskseq.cli import main
from maskseq.maskio import read_png, rle_encode, write_png

from conftest import disk_mask, rect_mask, rectilinear_mask


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestEncodeDecode:
    def test_square_png_four_corners(self, tmp_path, capsys):
        p = tmp_path / "sq.png"
        write_png(rect_mask(16, 16, 32, 32, size=64), p)
        code, out, _ = run(capsys, "--points", 4, "encode", p)
        assert code == 0
        vals = json.loads(out.strip())
        assert len(vals) == 8
        # corners at pixel 16 and 48 of 64 -> bins 250 and 750
        assert vals == [250, 250, 750, 250, 750, 750, 250, 750]

    def test_empty_png_exit_3(self, tmp_path, capsys):
        p = tmp_path / "empty.png"
        write_png(BinaryMask(np.zeros((16, 16), bool)), p)
        code, _, err = run(capsys, "encode", p)
        assert code == 3
        assert "no foreground" in err

    def test_rle_equals_png(self, tmp_path, capsys):
        mask = rect_mask(5, 9, 20, 17, size=48)
        png, rle = tmp_path / "m.png", tmp_path / "m.json"
        write_png(mask, png)
        rle.write_text(json.dumps(rle_encode(mask)))
        _, out_png, _ = run(capsys, "encode", png)
        _, out_rle, _ = run(capsys, "encode", rle)
        assert out_png == out_rle

    def test_round_trip_disk(self, tmp_path, capsys):
        mask = disk_mask(radius=44.0, size=128)
        p = tmp_path / "disk.png"
        write_png(mask, p)
        code, out, _ = run(capsys, "encode", p)
        assert code == 0
        rec = tmp_path / "rec.png"
        code, _, _ = run(capsys, "decode", out.strip(), "--width", 128, "--height", 128, "--out", rec)
        assert code == 0
        assert mask_iou(read_png(rec), mask) >= 0.97

    def test_decode_empty_exit_3(self, tmp_path, capsys):
        code, _, err = run(capsys, "decode", "", "--width", 8, "--height", 8,
                           "--out", tmp_path / "x.png")
        assert code == 3
        assert "no-target" in err

    def test_decode_malformed_exit_2_with_offset(self, tmp_path, capsys):
        code, _, err = run(capsys, "decode", "[1, 2, bad]", "--width", 8, "--height", 8,
                           "--out", tmp_path / "x.png")
        assert code == 2
        assert "byte offset" in err

    def test_encode_out_file(self, tmp_path, capsys):
        p = tmp_path / "sq.png"
        write_png(rect_mask(4, 4, 8, 8, size=32), p)
        seq_file = tmp_path / "seq.txt"
        code, out, _ = run(capsys, "--points", 4, "encode", p, "--out", seq_file)
        assert code == 0 and out == ""
        assert seq_file.read_text().strip().startswith("[")


class TestUpperBound:
    def test_csv_shape_single_mask(self, tmp_path, capsys):
        d = tmp_path / "corpus"
        d.mkdir()
        write_png(rect_mask(10, 10, 40, 40, size=128), d / "m0.png")
        code, out, _ = run(capsys, "--jobs", 1, "upper-bound", d, "--n-list", "8,16")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["n", "method", "miou"]
        assert len(rows) == 1 + 2 * 2  # two n values x two methods
        assert {r[1] for r in rows[1:]} == {"adaptive", "uniform"}

    def test_adaptive_column_ge_uniform(self, tmp_path, capsys, rng):
        d = tmp_path / "jl"
        lines = [json.dumps({"rle": rle_encode(rectilinear_mask(rng))}) for _ in range(12)]
        d.write_text("\n".join(lines) + "\n")
        svg_path = tmp_path / "plot.svg"
        csv_path = tmp_path / "ub.csv"
        code, out, _ = run(capsys, "--jobs", 1, "upper-bound", d,
                           "--n-list", "16,32", "--csv", csv_path, "--svg", svg_path)
        assert code == 0
        rows = list(csv.reader(io.StringIO(csv_path.read_text())))[1:]
        by = {(int(r[0]), r[1]): float(r[2]) for r in rows}
        for n in (16, 32):
            assert by[(n, "adaptive")] >= by[(n, "uniform")]
        svg = svg_path.read_text()
        assert svg.startswith("<svg") and "polyline" in svg


class TestEval:
    def gt_fixture(self, tmp_path, with_pred=True):
        lines = []
        preds = []
        for i in range(2):
            seq = QuantSeq(((100, 100), (500, 100), (500, 500), (100, 500)))
            pred = serialize(GroundingOutput.of_masks([seq]))
            rec = {"id": f"s{i}", "width": 100, "height": 100,
                   "gt_masks": [{"polygon": [10, 10, 50, 10, 50, 50, 10, 50]}]}
            if with_pred:
                rec["prediction"] = pred
            preds.append(pred)
            lines.append(json.dumps(rec))
        gt = tmp_path / "gt.jsonl"
        gt.write_text("\n".join(lines) + "\n")
        return gt, preds

    def test_perfect_inline_predictions(self, tmp_path, capsys):
        gt, _ = self.gt_fixture(tmp_path)
        code, out, _ = run(capsys, "eval", gt, "--task", "res")
        assert code == 0
        report = json.loads(out)
        assert report["miou"] == 1.0
        assert report["sample_count"] == 2

    def test_separate_pred_file(self, tmp_path, capsys):
        gt, preds = self.gt_fixture(tmp_path, with_pred=False)
        pf = tmp_path / "preds.txt"
        pf.write_text("\n".join(preds) + "\n")
        code, out, _ = run(capsys, "eval", gt, pf, "--task", "res")
        assert code == 0
        assert json.loads(out)["miou"] == 1.0

    def test_missing_pred_line_exit_2(self, tmp_path, capsys):
        gt, preds = self.gt_fixture(tmp_path, with_pred=False)
        pf = tmp_path / "preds.txt"
        pf.write_text(preds[0] + "\n")
        code, _, err = run(capsys, "eval", gt, pf, "--task", "res")
        assert code == 2
        assert "missing prediction" in err

    def test_gres_report_fields(self, tmp_path, capsys):
        rec = {"id": "nt", "width": 50, "height": 50, "no_target": True, "prediction": ""}
        gt = tmp_path / "gt.jsonl"
        gt.write_text(json.dumps(rec) + "\n")
        code, out, _ = run(capsys, "eval", gt, "--task", "gres")
        report = json.loads(out)
        assert (report["giou"], report["n_acc"], report["t_acc"]) == (1.0, 1.0, 1.0)
        assert any("t_acc" in f for f in report["flags"])


class TestConvertCli:
    def test_convert_and_stats(self, tmp_path, capsys):
        from test_instructgen import coco_fixture

        instances, refs = coco_fixture(tmp_path)
        out = tmp_path / "records.jsonl"
        code, stdout, _ = run(capsys, "--jobs", 1, "convert", "--task", "res",
                              "--instances", instances, "--refs", refs, "--out", out)
        assert code == 0
        stats = json.loads(stdout)
        assert stats["records"] == 6
        assert len(out.read_text().splitlines()) == 6

    def test_attcoseg_cli(self, tmp_path, capsys):
        from test_instructgen import attcoseg_fixture

        pairs, negatives = attcoseg_fixture(tmp_path)
        out = tmp_path / "att.jsonl"
        code, stdout, _ = run(capsys, "attcoseg", "--pairs", pairs, "--negatives", negatives,
                              "--k", 4, "--out", out)
        assert code == 0
        assert json.loads(stdout)["records"] == 1


class TestVisualize:
    def test_one_mask_path(self, tmp_path, capsys):
        seq = QuantSeq(tuple((int(a), int(b)) for a, b in
                             np.random.default_rng(0).integers(0, 1000, size=(32, 2))))
        text = serialize(GroundingOutput.of_masks([seq]))
        out = tmp_path / "viz.svg"
        code, _, _ = run(capsys, "visualize", "img.jpg", text,
                         "--width", 640, "--height", 480, "--out", out)
        assert code == 0
        svg = out.read_text()
        assert svg.count("<polygon") == 1
        poly = svg.split('points="')[1].split('"')[0]
        assert len(poly.split()) == 32

    def test_two_masks_two_paths(self, tmp_path, capsys):
        seqs = [QuantSeq(((1, 2), (500, 2), (500, 600))), QuantSeq(((10, 20), (900, 20), (900, 900)))]
        text = serialize(GroundingOutput.of_masks(seqs))
        out = tmp_path / "viz.svg"
        run(capsys, "visualize", "img.jpg", text, "--width", 100, "--height", 100, "--out", out)
        assert out.read_text().count("<polygon") == 2

    def test_no_target_layer(self, tmp_path, capsys):
        out = tmp_path / "viz.svg"
        code, _, _ = run(capsys, "visualize", "img.jpg", "",
                         "--width", 100, "--height", 100, "--out", out)
        assert code == 0
        svg = out.read_text()
        assert 'id="no-target"' in svg and "no target" in svg

    def test_boxes(self, tmp_path, capsys):
        text = serialize(GroundingOutput.of_boxes([(100, 100, 500, 500)]))
        out = tmp_path / "viz.svg"
        run(capsys, "visualize", "img.jpg", text, "--expect", "boxes",
            "--width", 200, "--height", 200, "--out", out)
        assert "<rect" in out.read_text()


class TestFormatFlag:
    def test_encode_json_format(self, tmp_path, capsys):
        p = tmp_path / "sq.png"
        write_png(rect_mask(4, 4, 8, 8, size=32), p)
        code, out, _ = run(capsys, "--points", 4, "--format", "json", "encode", p)
        assert code == 0
        obj = json.loads(out)
        assert obj["width"] == 32 and obj["sequence"].startswith("[")

    def test_upper_bound_json_format(self, tmp_path, capsys):
        d = tmp_path / "corpus"
        d.mkdir()
        write_png(rect_mask(10, 10, 40, 40, size=128), d / "m0.png")
        code, out, _ = run(capsys, "--jobs", 1, "--format", "json", "upper-bound", d,
                           "--n-list", "8")
        rows = json.loads(out)
        assert {r["method"] for r in rows} == {"adaptive", "uniform"}

    def test_eval_csv_format(self, tmp_path, capsys):
        rec = {"id": "s", "width": 100, "height": 100,
               "gt_masks": [{"polygon": [10, 10, 50, 10, 50, 50, 10, 50]}],
               "prediction": serialize(GroundingOutput.of_masks(
                   [QuantSeq(((100, 100), (500, 100), (500, 500), (100, 500)))]))}
        gt = tmp_path / "gt.jsonl"
        gt.write_text(json.dumps(rec) + "\n")
        code, out, _ = run(capsys, "--format", "csv", "eval", gt, "--task", "res")
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["metric", "value"]
        assert ["miou", "1.000000"] in rows


class TestParseCmd:
    def test_parse_json(self, capsys):
        code, out, _ = run(capsys, "parse", "[1, 2, 3, 4, 5, 6]")
        assert code == 0
        obj = json.loads(out)
        assert obj["kind"] == "masks"
        assert obj["masks"] == [[[1, 2], [3, 4], [5, 6]]]

    def test_parse_empty(self, capsys):
        code, out, _ = run(capsys, "parse", "")
        assert json.loads(out)["kind"] == "no_target"

    def test_parse_lenient_warns(self, capsys):
        code, out, _ = run(capsys, "parse", "[1, 2, 3, 4, 5, 6, 7]", "--lenient")
        obj = json.loads(out)
        assert obj["warnings"] == 1


def test_console_script_installed(tmp_path):
    r = subprocess.run([sys.executable, "-m", "maskseq.cli", "--version"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert "maskseq" in r.stdout
