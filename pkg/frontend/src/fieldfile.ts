/**
 * Reader for the harness's binary field-grid format.
 *
 * 32-byte little-endian header: magic "FGRD", version u32, grid n u32,
 * component count u32, model time f64, 8 reserved bytes; then
 * n*n*components float64 values in C order with the x index leading.
 */

import { readFileSync } from "fs";

export const MAGIC = "FGRD";
export const VERSION = 1;
export const HEADER_BYTES = 32;

export interface FieldGrid {
  n: number;
  ncomp: number;
  time: number;
  /** values[(i*n + j)*ncomp + c]: component c at x-index i, y-index j */
  values: Float64Array;
}

export class FieldFormatError extends Error {}

export function decodeField(buf: Buffer, label = "field"): FieldGrid {
  if (buf.length < HEADER_BYTES) {
    throw new FieldFormatError(`${label}: truncated header (${buf.length} bytes)`);
  }
  const magic = buf.toString("latin1", 0, 4);
  if (magic !== MAGIC) {
    throw new FieldFormatError(`${label}: bad magic ${JSON.stringify(magic)}`);
  }
  const version = buf.readUInt32LE(4);
  if (version !== VERSION) {
    throw new FieldFormatError(`${label}: unsupported version ${version}`);
  }
  const n = buf.readUInt32LE(8);
  const ncomp = buf.readUInt32LE(12);
  const time = buf.readDoubleLE(16);
  if (n < 2 || ncomp < 1) {
    throw new FieldFormatError(`${label}: invalid dimensions n=${n} components=${ncomp}`);
  }
  const expected = HEADER_BYTES + 8 * n * n * ncomp;
  if (buf.length !== expected) {
    throw new FieldFormatError(
      `${label}: expected ${expected} bytes, found ${buf.length}`,
    );
  }
  const values = new Float64Array(n * n * ncomp);
  for (let k = 0; k < values.length; k++) {
    values[k] = buf.readDoubleLE(HEADER_BYTES + 8 * k);
  }
  return { n, ncomp, time, values };
}

export function readField(path: string): FieldGrid {
  return decodeField(readFileSync(path), path);
}

export function at(f: FieldGrid, i: number, j: number, c: number): number {
  return f.values[(i * f.n + j) * f.ncomp + c];
}

export function speed(f: FieldGrid, i: number, j: number): number {
  return Math.hypot(at(f, i, j, 0), at(f, i, j, 1));
}

/** Pointwise Euclidean error magnitude |est - truth| per node (flattened x-major). */
export function errorMagnitude(est: FieldGrid, truth: FieldGrid): Float64Array {
  if (est.n !== truth.n || est.ncomp !== truth.ncomp) {
    throw new FieldFormatError(
      `grids disagree: ${est.n}x${est.n}x${est.ncomp} vs ${truth.n}x${truth.n}x${truth.ncomp}`,
    );
  }
  const out = new Float64Array(est.n * est.n);
  for (let i = 0; i < est.n; i++) {
    for (let j = 0; j < est.n; j++) {
      let sq = 0;
      for (let c = 0; c < est.ncomp; c++) {
        const d = at(est, i, j, c) - at(truth, i, j, c);
        sq += d * d;
      }
      out[i * est.n + j] = Math.sqrt(sq);
    }
  }
  return out;
}
