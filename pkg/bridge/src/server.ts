/**
 * Segmenter protocol server: line-delimited JSON over TCP.
 *
 * Request:  {"request_id", "image_path", "variant",
 *            "boxes": [{"x_min","y_min","x_max","y_max"}]}
 * Response: {"request_id", "results": [{"box_index",
 *            "masks": [{"rle": {"width","height","runs"}, "confidence"}]}]}
 *
 * At most 3 masks per box, sorted by descending confidence. The `echo`
 * variant answers each box with its filled rectangle at confidence 1.0,
 * which lets integration tests run without any model weights. A malformed
 * line produces an error response that echoes request_id when one could be
 * parsed; the connection stays open either way.
 */

import * as net from "node:net";

import { readPngSize } from "./png";

interface Box {
  x_min: number;
  y_min: number;
  x_max: number;
  y_max: number;
}

interface MaskPayload {
  rle: { width: number; height: number; runs: number[] };
  confidence: number;
}

function isBox(value: unknown): value is Box {
  if (typeof value !== "object" || value === null) return false;
  const b = value as Record<string, unknown>;
  return ["x_min", "y_min", "x_max", "y_max"].every(
    (k) => typeof b[k] === "number" && Number.isInteger(b[k]),
  );
}

/** Row-major [start, length, ...] runs for a filled rectangle. */
export function rectangleRle(
  box: Box,
  width: number,
  height: number,
): { width: number; height: number; runs: number[] } {
  const x0 = Math.max(0, box.x_min);
  const y0 = Math.max(0, box.y_min);
  const x1 = Math.min(width - 1, box.x_max);
  const y1 = Math.min(height - 1, box.y_max);
  const runs: number[] = [];
  for (let y = y0; y <= y1; y++) {
    if (x1 >= x0) {
      runs.push(y * width + x0, x1 - x0 + 1);
    }
  }
  return { width, height, runs };
}

function handleLine(line: string, modelSpec: string): string {
  let requestId: unknown = null;
  try {
    const request = JSON.parse(line) as Record<string, unknown>;
    requestId = request.request_id ?? null;
    if (typeof request.request_id !== "string") {
      throw new Error("request_id must be a string");
    }
    if (typeof request.image_path !== "string") {
      throw new Error("image_path must be a string");
    }
    if (!Array.isArray(request.boxes) || !request.boxes.every(isBox)) {
      throw new Error("boxes must be an array of integer x_min/y_min/x_max/y_max objects");
    }
    const variant = typeof request.variant === "string" ? request.variant : modelSpec;
    if (variant !== "echo") {
      throw new Error(`variant ${JSON.stringify(variant)} is not served here; use "echo"`);
    }
    const { width, height } = readPngSize(request.image_path);
    const results = (request.boxes as Box[]).map((box, index) => {
      const rle = rectangleRle(box, width, height);
      const masks: MaskPayload[] = rle.runs.length > 0 ? [{ rle, confidence: 1.0 }] : [];
      return { box_index: index, masks };
    });
    return JSON.stringify({ request_id: request.request_id, results });
  } catch (err) {
    const message = err instanceof Error ? err.message : String(err);
    return JSON.stringify({ request_id: requestId, error: message });
  }
}

export function createSegmenterServer(modelSpec = "echo"): net.Server {
  return net.createServer((socket) => {
    let buffer = "";
    socket.on("data", (chunk) => {
      buffer += chunk.toString("utf-8");
      let newline;
      while ((newline = buffer.indexOf("\n")) >= 0) {
        const line = buffer.slice(0, newline);
        buffer = buffer.slice(newline + 1);
        if (line.trim() === "") continue;
        socket.write(handleLine(line, modelSpec) + "\n");
      }
    });
    socket.on("error", () => socket.destroy());
  });
}

export function serve(host: string, port: number, modelSpec = "echo"): Promise<net.Server> {
  const server = createSegmenterServer(modelSpec);
  return new Promise((resolve, reject) => {
    server.once("error", reject);
    server.listen(port, host, () => {
      const addr = server.address() as net.AddressInfo;
      console.log(`segmenter listening on ${addr.address}:${addr.port}`);
      resolve(server);
    });
  });
}
