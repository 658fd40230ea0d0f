/** Export one `.amap` blob per tile-manifest record. */

import * as fs from "node:fs";
import * as path from "node:path";

import { writeAmap } from "./amap";
import { readManifest, tileKey } from "./manifest";
import { resolveModel } from "./models";

export interface ExportOptions {
  manifestPath: string;
  tilesDir: string;
  outDir: string;
  model: string;
  resolution: number;
}

export interface ExportResult {
  written: number;
  skipped: string[];
}

export function exportTileMaps(opts: ExportOptions): ExportResult {
  const model = resolveModel(opts.model);
  const records = readManifest(opts.manifestPath);
  const skipped: string[] = [];
  let written = 0;
  for (const rec of records) {
    const key = tileKey(rec);
    const tileFile = path.join(opts.tilesDir, `${key}.png`);
    if (!fs.existsSync(tileFile)) {
      skipped.push(key);
      console.warn(`warning: missing tile ${tileFile}, skipped`);
      continue;
    }
    const map = model(tileFile, rec, opts.resolution);
    writeAmap(path.join(opts.outDir, `${key}.amap`), map);
    written++;
  }
  return { written, skipped };
}
