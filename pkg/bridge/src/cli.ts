/**
 * Bridge command line.
 *
 *   cli.js export-maps --manifest F --tiles D --out D --model zeros|intensity
 *                      [--resolution N]
 *   cli.js serve [--host H] [--port N] [--model echo]
 *   cli.js copy-amap <in> <out>     decode + re-encode one blob (round-trip check)
 */

import { parseArgs } from "node:util";

import { readAmap, writeAmap } from "./amap";
import { exportTileMaps } from "./exportMaps";
import { serve } from "./server";

function fail(message: string): never {
  console.error(`error: ${message}`);
  process.exit(1);
}

async function main(argv: string[]): Promise<void> {
  const command = argv[0];
  const rest = argv.slice(1);
  if (command === "export-maps") {
    const { values } = parseArgs({
      args: rest,
      options: {
        manifest: { type: "string" },
        tiles: { type: "string" },
        out: { type: "string" },
        model: { type: "string", default: "zeros" },
        resolution: { type: "string", default: "518" },
      },
    });
    if (!values.manifest || !values.tiles || !values.out) {
      fail("export-maps needs --manifest, --tiles and --out");
    }
    const result = exportTileMaps({
      manifestPath: values.manifest,
      tilesDir: values.tiles,
      outDir: values.out,
      model: values.model!,
      resolution: parseInt(values.resolution!, 10),
    });
    console.log(`wrote ${result.written} blobs, skipped ${result.skipped.length}`);
  } else if (command === "serve") {
    const { values } = parseArgs({
      args: rest,
      options: {
        host: { type: "string", default: "127.0.0.1" },
        port: { type: "string", default: "0" },
        model: { type: "string", default: "echo" },
      },
    });
    await serve(values.host!, parseInt(values.port!, 10), values.model!);
  } else if (command === "copy-amap") {
    if (rest.length !== 2) {
      fail("copy-amap needs <in> <out>");
    }
    writeAmap(rest[1], readAmap(rest[0]));
  } else {
    fail(`unknown command ${JSON.stringify(command)}; use export-maps, serve or copy-amap`);
  }
}

main(process.argv.slice(2)).catch((err) => fail(err instanceof Error ? err.message : String(err)));
