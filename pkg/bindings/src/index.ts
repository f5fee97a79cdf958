/**
 * Node bindings for the maskseq core.
 *
 * A translation shim only: masks cross the boundary as dense row-major 0/1
 * buffers, everything else is strings and JSON produced by the core CLI.
 * Outputs are byte-identical to driving the CLI by hand on the same data.
 */

import { writeFileSync, readFileSync } from "node:fs";
import { join } from "node:path";

import { cliBinary, runCli, withTempDir } from "./cli.js";
import { bufferToRle, rleToBuffer } from "./rle.js";
import {
  EncodeConfig,
  EvalReport,
  EvalSampleInput,
  EvalTask,
  GroundingResult,
  MaskBuffer,
  RleMask,
} from "./types.js";

export { bufferToRle, rleToBuffer } from "./rle.js";
export * from "./types.js";

export const VERSION = "0.1.0";

/** Core library version, as reported by the CLI. */
export function coreVersion(): string {
  return runCli(["--version"]).trim().replace(/^maskseq\s+/, "");
}

function globalFlags(cfg: EncodeConfig): string[] {
  const flags: string[] = [];
  if (cfg.nBins !== undefined) flags.push("--n-bins", String(cfg.nBins));
  if (cfg.points !== undefined) flags.push("--points", String(cfg.points));
  if (cfg.method !== undefined) flags.push("--method", cfg.method);
  if (cfg.dense !== undefined) flags.push("--dense", String(cfg.dense));
  return flags;
}

/** Encode a mask buffer into its serialized sequence string. */
export function encodeMask(mask: MaskBuffer, cfg: EncodeConfig = {}): string {
  return withTempDir((dir) => {
    const path = join(dir, "mask.json");
    writeFileSync(path, JSON.stringify(bufferToRle(mask)));
    return runCli([...globalFlags(cfg), "encode", path]).replace(/\n$/, "");
  });
}

/** Decode a serialized sequence string back into a mask buffer. */
export function decodeMask(
  text: string,
  dims: { width: number; height: number },
  cfg: EncodeConfig = {},
): MaskBuffer {
  return withTempDir((dir) => {
    const out = join(dir, "mask.json");
    runCli([
      ...globalFlags(cfg),
      "decode",
      text,
      "--width",
      String(dims.width),
      "--height",
      String(dims.height),
      "--out",
      out,
    ]);
    const rle = JSON.parse(readFileSync(out, "utf-8")) as RleMask;
    return rleToBuffer(rle);
  });
}

/** Parse a grounding output string into its structured form. */
export function parseGrounding(
  text: string,
  options: { expect?: "masks" | "boxes"; lenient?: boolean; nBins?: number } = {},
): GroundingResult {
  const args = [...globalFlags({ nBins: options.nBins }), "parse", text];
  args.push("--expect", options.expect ?? "masks");
  if (options.lenient) args.push("--lenient");
  return JSON.parse(runCli(args)) as GroundingResult;
}

/** Score predictions against ground truth and return the metric report. */
export function evaluate(
  gt: EvalSampleInput[],
  predictions: string[],
  task: EvalTask,
  options: { nBins?: number; thresholds?: number[] } = {},
): EvalReport {
  if (predictions.length < gt.length) {
    throw new RangeError(`got ${predictions.length} predictions for ${gt.length} samples`);
  }
  return withTempDir((dir) => {
    const gtPath = join(dir, "gt.jsonl");
    const lines = gt.map((s) =>
      JSON.stringify({
        id: s.id,
        width: s.width,
        height: s.height,
        no_target: s.noTarget ?? false,
        gt_masks: (s.gtMasks ?? []).map((rle) => ({ rle })),
        gt_boxes: s.gtBoxes ?? [],
      }),
    );
    writeFileSync(gtPath, lines.join("\n") + "\n");
    const predPath = join(dir, "preds.txt");
    writeFileSync(predPath, predictions.join("\n") + "\n");
    const args = [...globalFlags({ nBins: options.nBins }), "eval", gtPath, predPath, "--task", task];
    if (options.thresholds) args.push("--thresholds", options.thresholds.join(","));
    return JSON.parse(runCli(args)) as EvalReport;
  });
}

/** Path or name of the CLI binary the bindings will invoke. */
export function binary(): string {
  return cliBinary();
}
