/**
 * Parity acceptance: over the 50-mask fixture corpus, the bindings and the
 * CLI (driven directly on the PNG files) must produce byte-identical
 * serialized sequences, and metric reports equal to 1e-12.
 */

import assert from "node:assert/strict";
import { spawnSync } from "node:child_process";
import { existsSync, readFileSync, writeFileSync, mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { test } from "node:test";
import { fileURLToPath } from "node:url";

import {
  binary,
  coreVersion,
  decodeMask,
  encodeMask,
  evaluate,
  parseGrounding,
  rleToBuffer,
  MaskSeqError,
  RleMask,
  VERSION,
} from "../src/index.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "..", "..", "test", "fixtures");

interface FixtureEntry {
  stem: string;
  width: number;
  height: number;
}

function loadManifest(): FixtureEntry[] {
  const path = join(FIXTURES, "manifest.json");
  assert.ok(existsSync(path), `fixture corpus missing; run: npm run fixtures (${path})`);
  return JSON.parse(readFileSync(path, "utf-8")) as FixtureEntry[];
}

function cliEncodePng(png: string, flags: string[] = []): string {
  const r = spawnSync(binary(), [...flags, "encode", png], { encoding: "utf-8" });
  assert.equal(r.status, 0, r.stderr);
  return r.stdout.replace(/\n$/, "");
}

test("version string matches the core library", () => {
  assert.equal(coreVersion(), VERSION);
});

test("50-mask encode parity: bindings vs CLI, byte-identical", () => {
  const manifest = loadManifest();
  assert.equal(manifest.length, 50);
  for (const entry of manifest) {
    const rle = JSON.parse(readFileSync(join(FIXTURES, `${entry.stem}.json`), "utf-8")) as RleMask;
    const viaBindings = encodeMask(rleToBuffer(rle));
    const viaCli = cliEncodePng(join(FIXTURES, `${entry.stem}.png`));
    assert.equal(viaBindings, viaCli, `mismatch on ${entry.stem}`);
  }
});

test("decode(encode(mask)) round trip keeps high overlap", () => {
  const manifest = loadManifest().slice(0, 10);
  for (const entry of manifest) {
    const rle = JSON.parse(readFileSync(join(FIXTURES, `${entry.stem}.json`), "utf-8")) as RleMask;
    const mask = rleToBuffer(rle);
    const text = encodeMask(mask);
    const back = decodeMask(text, { width: entry.width, height: entry.height });
    let inter = 0;
    let union = 0;
    for (let i = 0; i < mask.data.length; i++) {
      // compare against the encoder's own target: the largest component
      inter += mask.data[i] & back.data[i];
      union += mask.data[i] | back.data[i];
    }
    assert.ok(union > 0);
    assert.ok(inter / union >= 0.55, `${entry.stem}: IoU ${inter / union}`);
  }
});

test("metric report parity: bindings vs CLI on the same inputs, 1e-12", () => {
  const manifest = loadManifest();
  const gt = manifest.map((entry) => {
    const rle = JSON.parse(readFileSync(join(FIXTURES, `${entry.stem}.json`), "utf-8")) as RleMask;
    return { entry, rle };
  });
  const predictions = gt.map(({ entry }) =>
    cliEncodePng(join(FIXTURES, `${entry.stem}.png`)),
  );

  const viaBindings = evaluate(
    gt.map(({ entry, rle }) => ({
      id: entry.stem,
      width: entry.width,
      height: entry.height,
      gtMasks: [rle],
    })),
    predictions,
    "res",
  );

  // independent path: write the eval JSONL here and drive the CLI directly
  const dir = mkdtempSync(join(tmpdir(), "maskseq-parity-"));
  try {
    const gtPath = join(dir, "gt.jsonl");
    writeFileSync(
      gtPath,
      gt
        .map(({ entry, rle }) =>
          JSON.stringify({
            id: entry.stem,
            width: entry.width,
            height: entry.height,
            no_target: false,
            gt_masks: [{ rle }],
            gt_boxes: [],
          }),
        )
        .join("\n") + "\n",
    );
    const predPath = join(dir, "preds.txt");
    writeFileSync(predPath, predictions.join("\n") + "\n");
    const r = spawnSync(binary(), ["eval", gtPath, predPath, "--task", "res"], {
      encoding: "utf-8",
    });
    assert.equal(r.status, 0, r.stderr);
    const viaCli = JSON.parse(r.stdout);
    assert.equal(viaBindings.sample_count, viaCli.sample_count);
    assert.ok(viaBindings.miou !== null && viaCli.miou !== null);
    assert.ok(Math.abs(viaBindings.miou! - viaCli.miou) <= 1e-12);
    assert.equal(viaBindings.parse_failures, viaCli.parse_failures);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
});

test("parse delegates to the core grammar", () => {
  assert.deepEqual(parseGrounding(""), {
    kind: "no_target",
    boxes: [],
    masks: [],
    warnings: 0,
  });
  const boxes = parseGrounding("[10, 20, 30, 40]", { expect: "boxes" });
  assert.equal(boxes.kind, "boxes");
  assert.deepEqual(boxes.boxes, [[10, 20, 30, 40]]);
  const lenient = parseGrounding("[1, 2, 3, 4, 5, 6, 7]", { lenient: true });
  assert.equal(lenient.warnings, 1);
});

test("error codes mirror the CLI exit contract", () => {
  assert.throws(
    () => parseGrounding("[1, 2, oops]"),
    (err: unknown) =>
      err instanceof MaskSeqError &&
      err.code === "parse_error" &&
      err.message.includes("byte offset"),
  );
  const empty = { data: new Uint8Array(16), width: 4, height: 4 };
  assert.throws(
    () => encodeMask(empty),
    (err: unknown) => err instanceof MaskSeqError && err.code === "empty_mask",
  );
  assert.throws(
    () => decodeMask("", { width: 4, height: 4 }),
    (err: unknown) => err instanceof MaskSeqError && err.code === "empty_mask",
  );
});
