/** Tile manifest reader: one JSON object per line with fixed field names. */

import * as fs from "node:fs";

export interface TileRecord {
  image_id: string;
  row_index: number;
  col_index: number;
  x0: number;
  y0: number;
  window: number;
  image_width: number;
  image_height: number;
}

const FIELDS: (keyof TileRecord)[] = [
  "image_id",
  "row_index",
  "col_index",
  "x0",
  "y0",
  "window",
  "image_width",
  "image_height",
];

export function parseManifest(text: string, source = "<manifest>"): TileRecord[] {
  const records: TileRecord[] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line === "") continue;
    let obj: Record<string, unknown>;
    try {
      obj = JSON.parse(line);
    } catch (err) {
      throw new Error(`${source}:${i + 1}: invalid manifest line: ${err}`);
    }
    for (const field of FIELDS) {
      if (!(field in obj)) {
        throw new Error(`${source}:${i + 1}: manifest record missing ${field}`);
      }
    }
    for (const key of Object.keys(obj)) {
      if (!FIELDS.includes(key as keyof TileRecord)) {
        throw new Error(`${source}:${i + 1}: unknown manifest field ${key}`);
      }
    }
    records.push(obj as unknown as TileRecord);
  }
  return records;
}

export function readManifest(file: string): TileRecord[] {
  return parseManifest(fs.readFileSync(file, "utf-8"), file);
}

export function tileKey(rec: TileRecord): string {
  return `${rec.image_id}__r${rec.row_index}_c${rec.col_index}`;
}
