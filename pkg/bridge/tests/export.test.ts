import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { PNG } from "pngjs";
import { describe, expect, it } from "vitest";

import { readAmap } from "../src/amap";
import { exportTileMaps } from "../src/exportMaps";

function writeGrayPng(file: string, width: number, height: number, fill: (i: number) => number) {
  const png = new PNG({ width, height, colorType: 0 });
  for (let i = 0; i < width * height; i++) {
    const v = fill(i);
    png.data[4 * i] = v;
    png.data[4 * i + 1] = v;
    png.data[4 * i + 2] = v;
    png.data[4 * i + 3] = 255;
  }
  fs.mkdirSync(path.dirname(file), { recursive: true });
  fs.writeFileSync(file, PNG.sync.write(png));
}

function setup(nTiles: number): { manifest: string; tiles: string; out: string } {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "export-"));
  const tiles = path.join(dir, "tiles");
  const lines: string[] = [];
  for (let c = 0; c < nTiles; c++) {
    lines.push(
      JSON.stringify({
        image_id: "img",
        row_index: 0,
        col_index: c,
        x0: 57 * c,
        y0: 0,
        window: 16,
        image_width: 16 + 57 * c,
        image_height: 16,
      }),
    );
    writeGrayPng(path.join(tiles, `img__r0_c${c}.png`), 16, 16, (i) => (i + c) % 256);
  }
  const manifest = path.join(dir, "tiles.jsonl");
  fs.writeFileSync(manifest, lines.join("\n") + "\n");
  return { manifest, tiles, out: path.join(dir, "maps") };
}

describe("export-maps", () => {
  it("writes one zeros blob per manifest record", () => {
    const { manifest, tiles, out } = setup(9);
    const result = exportTileMaps({
      manifestPath: manifest,
      tilesDir: tiles,
      outDir: out,
      model: "zeros",
      resolution: 24,
    });
    expect(result.written).toBe(9);
    expect(result.skipped).toHaveLength(0);
    const files = fs.readdirSync(out).sort();
    expect(files).toHaveLength(9);
    const map = readAmap(path.join(out, files[0]));
    expect(map.width).toBe(24);
    expect(map.height).toBe(24);
    expect(map.values.every((v) => v === 0)).toBe(true);
  });

  it("intensity model emits gray/255 at tile resolution", () => {
    const { manifest, tiles, out } = setup(1);
    exportTileMaps({
      manifestPath: manifest,
      tilesDir: tiles,
      outDir: out,
      model: "intensity",
      resolution: 99,
    });
    const map = readAmap(path.join(out, "img__r0_c0.amap"));
    expect(map.width).toBe(16);
    expect(map.height).toBe(16);
    for (let i = 0; i < map.values.length; i++) {
      expect(map.values[i]).toBe(Math.fround((i % 256) / 255));
    }
  });

  it("skips missing tiles with a warning and keeps going", () => {
    const { manifest, tiles, out } = setup(3);
    fs.unlinkSync(path.join(tiles, "img__r0_c1.png"));
    const result = exportTileMaps({
      manifestPath: manifest,
      tilesDir: tiles,
      outDir: out,
      model: "zeros",
      resolution: 8,
    });
    expect(result.written).toBe(2);
    expect(result.skipped).toEqual(["img__r0_c1"]);
  });

  it("fails on unknown model specs", () => {
    const { manifest, tiles, out } = setup(1);
    expect(() =>
      exportTileMaps({
        manifestPath: manifest,
        tilesDir: tiles,
        outDir: out,
        model: "resnet-v9",
        resolution: 8,
      }),
    ).toThrow(/cannot load model/);
  });
});
