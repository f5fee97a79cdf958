/** Shared types for the maskseq bindings. */

/** Dense binary mask: row-major uint8 buffer of 0/1 with (height, width) shape. */
export interface MaskBuffer {
  /** Row-major values, length must equal width * height, every value 0 or 1. */
  data: Uint8Array;
  width: number;
  height: number;
}

/** COCO uncompressed RLE: column-major run lengths, background run first. */
export interface RleMask {
  counts: number[];
  size: [height: number, width: number];
}

export interface EncodeConfig {
  /** Quantization bins (default 1000). */
  nBins?: number;
  /** Points per sequence (default 32). */
  points?: number;
  /** Sampling method (default "adaptive"). */
  method?: "adaptive" | "uniform";
  /** Dense resample count (default 400). */
  dense?: number;
}

/** Parsed grounding output, mirroring the core parser's JSON shape. */
export interface GroundingResult {
  kind: "no_target" | "boxes" | "masks";
  boxes: [number, number, number, number][];
  masks: [number, number][][];
  warnings: number;
}

export type EvalTask = "rec" | "res" | "grec" | "gres";

/** One ground-truth sample for bound evaluation. */
export interface EvalSampleInput {
  id: string;
  width: number;
  height: number;
  noTarget?: boolean;
  /** Ground-truth masks as RLE payloads. */
  gtMasks?: RleMask[];
  /** Ground-truth boxes in absolute pixels. */
  gtBoxes?: [number, number, number, number][];
}

export interface EvalReport {
  task: string;
  sample_count: number;
  miou: number | null;
  giou: number | null;
  n_acc: number | null;
  t_acc: number | null;
  pr_at: Record<string, number>;
  parse_failures: number;
  flags: string[];
}

/** Error codes mirroring the CLI exit-code contract. */
export type MaskSeqErrorCode = "parse_error" | "empty_mask" | "cli_failure";

export class MaskSeqError extends Error {
  readonly code: MaskSeqErrorCode;

  constructor(code: MaskSeqErrorCode, message: string) {
    super(message);
    this.name = "MaskSeqError";
    this.code = code;
  }
}
