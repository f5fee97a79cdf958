/**
 * Subprocess plumbing for the core CLI.
 *
 * The binary is `maskseq` on PATH, overridable with MASKSEQ_BIN. Exit codes
 * map onto stable error codes: 2 -> parse_error, 3 -> empty_mask, anything
 * else nonzero -> cli_failure. Stderr text is carried into the message so
 * core diagnostics (including byte offsets) surface unchanged.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { MaskSeqError } from "./types.js";

export function cliBinary(): string {
  return process.env.MASKSEQ_BIN ?? "maskseq";
}

export function runCli(args: string[]): string {
  const result = spawnSync(cliBinary(), args, {
    encoding: "utf-8",
    maxBuffer: 64 * 1024 * 1024,
  });
  if (result.error) {
    throw new MaskSeqError("cli_failure", `failed to launch ${cliBinary()}: ${result.error.message}`);
  }
  if (result.status !== 0) {
    const detail = (result.stderr ?? "").trim();
    if (result.status === 2) {
      throw new MaskSeqError("parse_error", detail || "parse/IO error");
    }
    if (result.status === 3) {
      throw new MaskSeqError("empty_mask", detail || "empty mask or no-target input");
    }
    throw new MaskSeqError("cli_failure", detail || `exit code ${result.status}`);
  }
  return result.stdout;
}

/** Run `fn` with a private temp directory that is always cleaned up. */
export function withTempDir<T>(fn: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "maskseq-"));
  try {
    return fn(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}
