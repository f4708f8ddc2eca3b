/**
 * npy.ts
 * NPY v1.0 encoding/decoding for little-endian float32 and uint8
 * tensors, the entry format inside minicube and prediction archives.
 */

import { endianness } from "node:os";
import { bytesOf } from "./buffers.js";

if (endianness() !== "LE") {
  throw new Error("big-endian hosts are not supported (NPY entries are little-endian)");
}

const MAGIC = Buffer.from("\x93NUMPY", "latin1");

export type NpyDtype = "<f4" | "|u1";

function shapeTuple(shape: readonly number[]): string {
  if (shape.length === 1) return `(${shape[0]},)`;
  return `(${shape.join(", ")})`;
}

/** Encode a typed array as NPY v1.0 bytes (C order, little-endian). */
export function encodeNpy(
  data: Float32Array | Uint8Array,
  shape: readonly number[]
): Buffer {
  const cells = shape.reduce((a, b) => a * b, 1);
  if (cells !== data.length) {
    throw new Error(`shape [${shape}] needs ${cells} elements, buffer has ${data.length}`);
  }
  const descr: NpyDtype = data instanceof Float32Array ? "<f4" : "|u1";
  let header = `{'descr': '${descr}', 'fortran_order': False, 'shape': ${shapeTuple(shape)}, }`;
  const unpadded = MAGIC.length + 2 + 2 + header.length + 1;
  header += " ".repeat((64 - (unpadded % 64)) % 64) + "\n";

  const head = Buffer.alloc(MAGIC.length + 4 + header.length);
  MAGIC.copy(head, 0);
  head[6] = 1; // format version 1.0
  head[7] = 0;
  head.writeUInt16LE(header.length, 8);
  head.write(header, 10, "latin1");
  return Buffer.concat([head, bytesOf(data)]);
}

export interface DecodedNpy {
  dtype: NpyDtype;
  shape: number[];
  data: Float32Array | Uint8Array;
}

/** Decode an NPY v1.0 buffer (used by the round-trip tests). */
export function decodeNpy(buf: Buffer): DecodedNpy {
  if (!buf.subarray(0, 6).equals(MAGIC)) {
    throw new Error("not an NPY entry (bad magic)");
  }
  if (buf[6] !== 1 || buf[7] !== 0) {
    throw new Error(`unsupported NPY version ${buf[6]}.${buf[7]}`);
  }
  const headerLen = buf.readUInt16LE(8);
  const header = buf.subarray(10, 10 + headerLen).toString("latin1");
  const descr = /'descr':\s*'([^']+)'/.exec(header)?.[1];
  const fortran = /'fortran_order':\s*(True|False)/.exec(header)?.[1];
  const shapeStr = /'shape':\s*\(([^)]*)\)/.exec(header)?.[1];
  if (!descr || !fortran || shapeStr === undefined) {
    throw new Error(`malformed NPY header: ${header}`);
  }
  if (fortran !== "False") throw new Error("fortran-order NPY entries unsupported");
  const shape = shapeStr
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0)
    .map((s) => Number.parseInt(s, 10));
  const cells = shape.reduce((a, b) => a * b, 1);
  const payload = buf.subarray(10 + headerLen);
  // copy so the result is aligned and detached from the archive buffer
  const bytes = new Uint8Array(payload.length);
  bytes.set(payload);
  if (descr === "<f4") {
    if (bytes.byteLength !== 4 * cells) throw new Error("payload size mismatch");
    return { dtype: "<f4", shape, data: new Float32Array(bytes.buffer, 0, cells) };
  }
  if (descr === "|u1") {
    if (bytes.byteLength !== cells) throw new Error("payload size mismatch");
    return { dtype: "|u1", shape, data: bytes };
  }
  throw new Error(`unsupported dtype ${descr}`);
}
