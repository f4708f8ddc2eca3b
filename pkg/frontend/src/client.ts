/**
 * client.ts
 * The binding layer: package in-memory arrays into the toolkit's
 * archive containers, drive its CLI, and hand back parsed canonical
 * JSON. No scoring math lives here; results are whatever the toolkit
 * computes, which is the point.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import {
  BoundFloatArray,
  BoundMaskArray,
  ValidationError,
  qualityFraction,
  sameShape,
  validateMask,
  validateValues,
} from "./buffers.js";
import { encodeNpy } from "./npy.js";
import { writeZip } from "./zip.js";

export type TrackName = "iid" | "ood" | "extreme" | "seasonal";

export const TRACKS: Record<TrackName, { context: number; target: number }> = {
  iid: { context: 10, target: 20 },
  ood: { context: 10, target: 20 },
  extreme: { context: 20, target: 40 },
  seasonal: { context: 70, target: 140 },
};

export const HIRES_HW = 128;
export const MESO_HW = 80;
export const MESO_CHANNELS = 5;
export const MESO_STEPS_PER_FRAME = 5;
export const MAX_ENSEMBLE = 10;

export interface Subscores {
  cube_id: string;
  member_index: number;
  mad: number | null;
  ols: number | null;
  emd: number | null;
  ssim: number | null;
  ens: number | null;
}

export interface ToolkitOptions {
  /** Python interpreter running the toolkit; default $ENSCORE_PYTHON or python3. */
  python?: string;
  /** Extra environment (e.g. ENSCORE_BACKEND) merged over process.env. */
  env?: Record<string, string>;
}

export class ToolkitError extends Error {
  readonly exitCode: number | null;
  readonly payload: { error: string; message: string } | null;
  constructor(exitCode: number | null, stderr: string) {
    let payload: { error: string; message: string } | null = null;
    try {
      payload = JSON.parse(stderr);
    } catch {
      /* stderr was not the toolkit's error JSON */
    }
    super(payload ? `${payload.error}: ${payload.message}` : `toolkit exited ${exitCode}: ${stderr}`);
    this.name = "ToolkitError";
    this.exitCode = exitCode;
    this.payload = payload;
  }
}

function runToolkit(args: string[], opts: ToolkitOptions = {}): Buffer {
  const python = opts.python ?? process.env.ENSCORE_PYTHON ?? "python3";
  const result = spawnSync(python, ["-m", "enscore", ...args], {
    env: { ...process.env, ...opts.env },
    maxBuffer: 64 * 1024 * 1024,
  });
  if (result.error) throw result.error;
  if (result.status !== 0) {
    throw new ToolkitError(result.status, result.stderr.toString("utf-8"));
  }
  return result.stdout;
}

/** Toolkit version string, straight from the CLI. */
export function toolkitVersion(opts: ToolkitOptions = {}): string {
  return runToolkit(["--version"], opts).toString("utf-8").trim();
}

function checkGeometry(name: string, shape: readonly number[], frames: number): void {
  if (shape[0] !== frames || shape[1] !== 4 || shape[2] !== HIRES_HW || shape[3] !== HIRES_HW) {
    throw new ValidationError(
      name,
      `shape [${shape}] does not match [${frames}, 4, ${HIRES_HW}, ${HIRES_HW}]`
    );
  }
}

/**
 * Wrap target-frame arrays into a full minicube archive: zeroed context
 * frames, meteorology, and elevation (scoring only reads the target
 * frames, so the padding never influences results).
 */
export function buildMinicubeArchive(
  target: BoundFloatArray,
  mask: BoundMaskArray,
  track: TrackName,
  cubeId: string
): Buffer {
  const { context, target: targetFrames } = TRACKS[track];
  validateValues("target", target);
  validateMask("mask", mask);
  if (!sameShape(target.shape, mask.shape)) {
    throw new ValidationError("mask", `shape [${mask.shape}] differs from target [${target.shape}]`);
  }
  checkGeometry("target", target.shape, targetFrames);

  const frames = context + targetFrames;
  const frameCells = 4 * HIRES_HW * HIRES_HW;
  const hires = new Float32Array(frames * frameCells);
  hires.set(target.data, context * frameCells);
  const fullMask = new Uint8Array(frames * frameCells);
  fullMask.set(mask.data, context * frameCells);
  const meso = new Float32Array(
    MESO_STEPS_PER_FRAME * frames * MESO_CHANNELS * MESO_HW * MESO_HW
  );

  const meta = {
    cube_id: cubeId,
    tile_id: "bound",
    start_month: 1,
    latitude_band: "north",
    quality_fraction: qualityFraction(fullMask),
  };
  return writeZip([
    { name: "hires", data: encodeNpy(hires, [frames, 4, HIRES_HW, HIRES_HW]) },
    { name: "mask", data: encodeNpy(fullMask, [frames, 4, HIRES_HW, HIRES_HW]) },
    {
      name: "meso",
      data: encodeNpy(meso, [
        MESO_STEPS_PER_FRAME * frames,
        MESO_CHANNELS,
        MESO_HW,
        MESO_HW,
      ]),
    },
    { name: "dem_hires", data: encodeNpy(new Float32Array(HIRES_HW * HIRES_HW), [HIRES_HW, HIRES_HW]) },
    { name: "dem_meso", data: encodeNpy(new Float32Array(MESO_HW * MESO_HW), [MESO_HW, MESO_HW]) },
    { name: "meta.json", data: Buffer.from(JSON.stringify(meta) + "\n", "utf-8") },
  ]);
}

/** Package forecast members into a prediction archive. */
export function buildPredictionArchive(
  members: BoundFloatArray[],
  track: TrackName,
  cubeId: string
): Buffer {
  if (members.length < 1 || members.length > MAX_ENSEMBLE) {
    throw new ValidationError("pred", `ensemble size ${members.length} not in 1..${MAX_ENSEMBLE}`);
  }
  const entries = members.map((m, i) => {
    validateValues(`pred_${i}`, m);
    checkGeometry(`pred_${i}`, m.shape, TRACKS[track].target);
    return { name: `pred_${i}`, data: encodeNpy(m.data, m.shape) };
  });
  entries.push({
    name: "meta.json",
    data: Buffer.from(JSON.stringify({ cube_id: cubeId }) + "\n", "utf-8"),
  });
  return writeZip(entries);
}

/**
 * Score one forecast (or ensemble) of target frames against target/mask
 * arrays, without the caller touching archive files. Returns the
 * toolkit's subscore JSON verbatim.
 */
export function scoreCube(
  target: BoundFloatArray,
  mask: BoundMaskArray,
  pred: BoundFloatArray | BoundFloatArray[],
  track: TrackName,
  opts: ToolkitOptions = {}
): Subscores {
  const members = Array.isArray(pred) ? pred : [pred];
  const work = mkdtempSync(join(tmpdir(), "enscore-"));
  try {
    const cubePath = join(work, "bound.mc.zip");
    const predPath = join(work, "bound.pred.zip");
    writeFileSync(cubePath, buildMinicubeArchive(target, mask, track, "bound"));
    writeFileSync(predPath, buildPredictionArchive(members, track, "bound"));
    const stdout = runToolkit(
      ["score", "--cube", cubePath, "--pred", predPath, "--track", track],
      opts
    );
    return JSON.parse(stdout.toString("utf-8")) as Subscores;
  } finally {
    rmSync(work, { recursive: true, force: true });
  }
}

export interface EvaluationResult {
  report: Record<string, unknown>;
  /** the exact canonical bytes the toolkit emitted */
  bytes: Buffer;
}

/** Evaluate a whole test directory; mirrors the CLI evaluate subcommand. */
export function evaluateDataset(
  testDir: string,
  predDir: string,
  track: TrackName,
  workers?: number,
  opts: ToolkitOptions = {}
): EvaluationResult {
  const work = mkdtempSync(join(tmpdir(), "enscore-"));
  try {
    const out = join(work, "report.json");
    const args = ["evaluate", "--test", testDir, "--pred", predDir, "--track", track, "--out", out];
    if (workers !== undefined) args.push("--workers", String(workers));
    runToolkit(args, opts);
    const bytes = readFileSync(out);
    return { report: JSON.parse(bytes.toString("utf-8")), bytes };
  } finally {
    rmSync(work, { recursive: true, force: true });
  }
}

/** Write persistence-baseline predictions for a test directory. */
export function runBaseline(
  testDir: string,
  outDir: string,
  track: TrackName,
  opts: ToolkitOptions = {}
): { cubes: number } {
  const stdout = runToolkit(
    ["baseline", "--test", testDir, "--out", outDir, "--track", track],
    opts
  );
  return JSON.parse(stdout.toString("utf-8")) as { cubes: number };
}
