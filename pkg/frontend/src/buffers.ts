/**
 * buffers.ts
 * Bound array views: shape/dtype/range validation over borrowed typed
 * arrays, and zero-copy Buffer wrapping. Inputs are never mutated and
 * never converted implicitly; anything off-contract throws.
 */

export type Shape4 = readonly [number, number, number, number];

export interface BoundFloatArray {
  readonly data: Float32Array;
  readonly shape: Shape4;
}

export interface BoundMaskArray {
  readonly data: Uint8Array;
  readonly shape: Shape4;
}

export class ValidationError extends Error {
  readonly argument: string;
  constructor(argument: string, message: string) {
    super(`${argument}: ${message}`);
    this.name = "ValidationError";
    this.argument = argument;
  }
}

function typeName(x: unknown): string {
  if (x === null || x === undefined) return String(x);
  return (x as object).constructor?.name ?? typeof x;
}

function checkShape(name: string, shape: Shape4, length: number): void {
  if (shape.length !== 4 || shape.some((d) => !Number.isInteger(d) || d <= 0)) {
    throw new ValidationError(name, `shape must be 4 positive integers, got [${shape}]`);
  }
  const cells = shape.reduce((a, b) => a * b, 1);
  if (cells !== length) {
    throw new ValidationError(
      name,
      `buffer holds ${length} elements but shape [${shape}] needs ${cells}`
    );
  }
}

/** Validate a reflectance-like tensor: float32, finite, inside [0, 1]. */
export function validateValues(name: string, arr: BoundFloatArray): void {
  const data: unknown = arr.data;
  if (!(data instanceof Float32Array)) {
    throw new ValidationError(name, `expected Float32Array, got ${typeName(data)}`);
  }
  checkShape(name, arr.shape, arr.data.length);
  for (let i = 0; i < arr.data.length; i++) {
    const v = arr.data[i];
    if (!Number.isFinite(v) || v < 0 || v > 1) {
      throw new ValidationError(name, `value ${v} at index ${i} outside [0, 1]`);
    }
  }
}

/** Validate a quality mask: uint8 with values in {0, 1}. */
export function validateMask(name: string, arr: BoundMaskArray): void {
  const data: unknown = arr.data;
  if (!(data instanceof Uint8Array)) {
    throw new ValidationError(name, `expected Uint8Array, got ${typeName(data)}`);
  }
  checkShape(name, arr.shape, arr.data.length);
  for (let i = 0; i < arr.data.length; i++) {
    const v = arr.data[i];
    if (v !== 0 && v !== 1) {
      throw new ValidationError(name, `mask value ${v} at index ${i} outside {0, 1}`);
    }
  }
}

export function sameShape(a: Shape4, b: Shape4): boolean {
  return a.length === b.length && a.every((d, i) => d === b[i]);
}

/** Zero-copy Buffer over a typed array's bytes (no element marshalling). */
export function bytesOf(view: ArrayBufferView): Buffer {
  return Buffer.from(view.buffer, view.byteOffset, view.byteLength);
}

/** Fraction of unmasked cells; exact float64, matching the toolkit. */
export function qualityFraction(mask: Uint8Array): number {
  let ones = 0;
  for (let i = 0; i < mask.length; i++) ones += mask[i];
  return 1.0 - ones / mask.length;
}
