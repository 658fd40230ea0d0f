/** PNG helpers: full decode via pngjs plus a header-only size probe. */

import * as fs from "node:fs";
import { PNG } from "pngjs";

export interface DecodedPng {
  width: number;
  height: number;
  /** RGBA samples, 4 bytes per pixel (pngjs expands every color type). */
  data: Uint8Array;
}

export function readPng(file: string): DecodedPng {
  const png = PNG.sync.read(fs.readFileSync(file));
  return { width: png.width, height: png.height, data: png.data };
}

/** Read width/height from the IHDR chunk without inflating the image. */
export function readPngSize(file: string): { width: number; height: number } {
  const fd = fs.openSync(file, "r");
  try {
    const head = Buffer.alloc(24);
    const n = fs.readSync(fd, head, 0, 24, 0);
    const signature = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);
    if (n < 24 || !head.subarray(0, 8).equals(signature) ||
        head.toString("ascii", 12, 16) !== "IHDR") {
      throw new Error(`${file}: not a PNG file`);
    }
    return { width: head.readUInt32BE(16), height: head.readUInt32BE(20) };
  } finally {
    fs.closeSync(fd);
  }
}
