/**
 * Anomaly-map blob codec (bit-exact, little-endian):
 *
 *   bytes 0..3    magic "AMAP"
 *   bytes 4..5    u16 version = 1
 *   bytes 6..9    u32 width
 *   bytes 10..13  u32 height
 *   bytes 14..    width*height float32 samples, row-major
 */

import * as fs from "node:fs";
import * as path from "node:path";

export const MAGIC = "AMAP";
export const VERSION = 1;
export const HEADER_BYTES = 14;

export interface AnomalyMap {
  width: number;
  height: number;
  values: Float32Array;
}

export function encodeAmap(map: AnomalyMap): Buffer {
  const { width, height, values } = map;
  if (width < 1 || height < 1 || values.length !== width * height) {
    throw new Error(`map geometry ${width}x${height} does not match ${values.length} samples`);
  }
  const buf = Buffer.alloc(HEADER_BYTES + 4 * values.length);
  buf.write(MAGIC, 0, "ascii");
  buf.writeUInt16LE(VERSION, 4);
  buf.writeUInt32LE(width, 6);
  buf.writeUInt32LE(height, 10);
  for (let i = 0; i < values.length; i++) {
    const v = values[i];
    if (!Number.isFinite(v)) {
      throw new Error(`non-finite sample at index ${i}`);
    }
    buf.writeFloatLE(v, HEADER_BYTES + 4 * i);
  }
  return buf;
}

export function decodeAmap(buf: Buffer): AnomalyMap {
  if (buf.length < HEADER_BYTES) {
    throw new Error(`truncated header (${buf.length} bytes)`);
  }
  if (buf.toString("ascii", 0, 4) !== MAGIC) {
    throw new Error(`bad magic ${JSON.stringify(buf.toString("ascii", 0, 4))}`);
  }
  const version = buf.readUInt16LE(4);
  if (version !== VERSION) {
    throw new Error(`unsupported version ${version}`);
  }
  const width = buf.readUInt32LE(6);
  const height = buf.readUInt32LE(10);
  if (width < 1 || height < 1) {
    throw new Error(`invalid dimensions ${width}x${height}`);
  }
  const expected = HEADER_BYTES + 4 * width * height;
  if (buf.length !== expected) {
    throw new Error(`expected ${expected} bytes, found ${buf.length}`);
  }
  const values = new Float32Array(width * height);
  for (let i = 0; i < values.length; i++) {
    values[i] = buf.readFloatLE(HEADER_BYTES + 4 * i);
    if (!Number.isFinite(values[i])) {
      throw new Error(`non-finite sample at index ${i}`);
    }
  }
  return { width, height, values };
}

export function readAmap(file: string): AnomalyMap {
  return decodeAmap(fs.readFileSync(file));
}

export function writeAmap(file: string, map: AnomalyMap): void {
  fs.mkdirSync(path.dirname(file), { recursive: true });
  fs.writeFileSync(file, encodeAmap(map));
}
