/**
 * Stub per-tile scoring models. A real detector would slot in here; the
 * bridge itself never post-processes scores, it only emits blobs.
 */

import { AnomalyMap } from "./amap";
import { TileRecord } from "./manifest";
import { readPng } from "./png";

export type TileModel = (tileFile: string, rec: TileRecord, resolution: number) => AnomalyMap;

/** All-zero map at the model resolution. */
export const zerosModel: TileModel = (_tileFile, _rec, resolution) => ({
  width: resolution,
  height: resolution,
  values: new Float32Array(resolution * resolution),
});

/**
 * Channel-mean intensity / 255 at tile resolution.
 *
 * The sum-then-divide order matches the pipeline's own passthrough scorer,
 * so the emitted blobs are byte-identical to what it would produce.
 */
export const intensityModel: TileModel = (tileFile, _rec, _resolution) => {
  const png = readPng(tileFile);
  const values = new Float32Array(png.width * png.height);
  for (let i = 0; i < values.length; i++) {
    const o = 4 * i; // RGBA stride
    const mean = (png.data[o] + png.data[o + 1] + png.data[o + 2]) / 3;
    values[i] = Math.fround(mean / 255);
  }
  return { width: png.width, height: png.height, values };
};

export function resolveModel(spec: string): TileModel {
  switch (spec) {
    case "zeros":
      return zerosModel;
    case "intensity":
      return intensityModel;
    default:
      throw new Error(
        `cannot load model ${JSON.stringify(spec)}: known specs are "zeros" and "intensity"`,
      );
  }
}
