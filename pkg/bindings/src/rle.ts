/**
 * Buffer <-> COCO uncompressed RLE translation.
 *
 * This is the only data transformation the bindings perform themselves:
 * everything else is delegated to the core CLI. Runs are column-major and
 * start with the background run (0 when the first pixel is foreground),
 * matching the core package's mask I/O.
 */

import { MaskBuffer, MaskSeqError, RleMask } from "./types.js";

/** Validate shape and 0/1 content; throws MaskSeqError on mismatch. */
export function checkMaskBuffer(mask: MaskBuffer): void {
  const { data, width, height } = mask;
  if (!Number.isInteger(width) || !Number.isInteger(height) || width < 1 || height < 1) {
    throw new MaskSeqError("cli_failure", `invalid mask dims ${width}x${height}`);
  }
  if (data.length !== width * height) {
    throw new MaskSeqError(
      "cli_failure",
      `mask buffer length ${data.length} != width*height ${width * height}`,
    );
  }
  for (let i = 0; i < data.length; i++) {
    if (data[i] > 1) {
      throw new MaskSeqError("cli_failure", `mask buffer value ${data[i]} at ${i} is not 0/1`);
    }
  }
}

/** Encode a row-major 0/1 buffer as column-major RLE counts. */
export function bufferToRle(mask: MaskBuffer): RleMask {
  checkMaskBuffer(mask);
  const { data, width, height } = mask;
  const counts: number[] = [];
  let current = 0; // counts always start with the zero run
  let run = 0;
  for (let x = 0; x < width; x++) {
    for (let y = 0; y < height; y++) {
      const v = data[y * width + x];
      if (v === current) {
        run++;
      } else {
        counts.push(run);
        current = v;
        run = 1;
      }
    }
  }
  counts.push(run);
  return { counts, size: [height, width] };
}

/** Decode column-major RLE counts into a row-major 0/1 buffer. */
export function rleToBuffer(rle: RleMask): MaskBuffer {
  const [height, width] = rle.size;
  const total = rle.counts.reduce((a, b) => a + b, 0);
  if (total !== width * height) {
    throw new MaskSeqError(
      "cli_failure",
      `RLE counts sum ${total} != ${width}*${height}`,
    );
  }
  const data = new Uint8Array(width * height);
  let value = 0;
  let pos = 0; // column-major position
  for (const count of rle.counts) {
    if (value === 1) {
      for (let k = 0; k < count; k++) {
        const p = pos + k;
        const x = Math.floor(p / height);
        const y = p % height;
        data[y * width + x] = 1;
      }
    }
    pos += count;
    value ^= 1;
  }
  return { data, width, height };
}
